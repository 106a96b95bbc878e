"""
Finite-n errors against the limit law
======================================

"""

# In the general regime n (rho_hat - 1) settles on a non-normal law built from
# the diffusion dY = a dt + sqrt(c Y+) dW. We sample both sides and compare.
import numpy as np
from gwcls import model_general, sample_limits
from gwcls.harness import ks_two_sample, scaled_errors
from gwcls.simulate import map_replicas

spec = model_general(0.3)
replicas = 1000

errors = {}
for n in (200, 2000):
    rows = map_replicas(lambda t: scaled_errors(spec, t).rho_n, spec, n, replicas, seed=7)
    errors[n] = np.array([r for r in rows if r is not None])

# 2**12 Euler steps keep this quick; the default is 2**14
limit = sample_limits(spec.drift, spec.total_offspring_var, replicas, seed=7, steps=2**12)
reference = limit.rho()
print("limit median:", np.median(reference).round(3))

for n, e in errors.items():
    print(f"n={n:5d}  median {np.median(e):7.3f}  KS to limit {ks_two_sample(e, reference):.3f}")

# The wrong scaling n^{3/2} keeps growing instead
for n in (200, 2000):
    print(f"n={n:5d}  sd of n^1.5 (rho_hat - 1): {np.std(np.sqrt(n) * errors[n]):.2f}")
