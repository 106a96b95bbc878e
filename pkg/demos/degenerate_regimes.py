"""
Normal limits in the degenerate regimes
=======================================

"""

# When every individual has exactly one child, rho_hat converges faster and
# n^{3/2} (rho_hat - 1) is asymptotically normal.
import numpy as np
from gwcls import limit_ab_degenerate_sigma2, limit_rho_degenerate_sigma2, model_equal_pair, model_unit_total
from gwcls.harness import scaled_errors
from gwcls.simulate import map_replicas

unit = model_unit_total(0.6)
sigma2 = limit_rho_degenerate_sigma2(unit)
e = np.array(map_replicas(lambda t: scaled_errors(unit, t).rho_n32, unit, 2000, 1000, seed=3))
print(f"{unit.regime.value}: var {e.var(ddof=1):.3f} vs {sigma2:.3f}")

# When both children types always come in equal numbers, V forgets its past
# and sqrt(n) (alpha_hat - alpha) is normal, with beta_hat mirroring it.
pair = model_equal_pair()
sigma2 = limit_ab_degenerate_sigma2(pair)
rows = map_replicas(lambda t: scaled_errors(pair, t), pair, 2000, 1000, seed=4)
a = np.array([r.alpha_sqrt_n for r in rows])
b = np.array([r.beta_sqrt_n for r in rows])
print(f"{pair.regime.value}: var {a.var(ddof=1):.3f} vs {sigma2:.3f}, corr {np.corrcoef(a, b)[0, 1]:.3f}")
