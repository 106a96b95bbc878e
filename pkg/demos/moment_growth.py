"""
Growth of moments along a path
==============================

"""

# Moments of the total population grow like k^l, those of the type difference
# and of the martingale differences only like k^{l/2}.
from gwcls import model_equal_pair, model_general
from gwcls.moments import expected_state, moment_growth

spec = model_general(0.3)
ks = [64, 128, 256, 512]
for target in ("U", "V", "M", "X"):
    rep = moment_growth(spec, target, 2, ks, replicas=2000, seed=5)
    print(f"{target}^2: fitted slope {rep.fitted_slope:.2f}, expected {rep.target_slope:.0f}")

# With equal-pair offspring V_k is just the current immigration difference
rep = moment_growth(model_equal_pair(), "V", 2, ks, replicas=2000, seed=6)
print(f"equal pair V^2: slope {rep.fitted_slope:.2f}")

# The mean is available in closed form
print("E X_10 =", expected_state(spec, 10))
