"""
Simulating a path and estimating the offspring means
=====================================================

"""

# A model is three finite laws: one offspring law per type plus immigration.
# model_general builds the reference instance with alpha = 0.3.
import numpy as np
from gwcls import estimate, model_general, simulate

spec = model_general(0.3)
print(spec.regime.value, "alpha =", spec.alpha, "beta =", spec.beta)

# One path of length 2000 on stream 0 of seed 1
traj = simulate(spec, 2000, seed=1)
print("last states:", traj.states[-3:].tolist())

# U is the total population, V the difference between the types.
# U wanders like a random walk, V stays of order sqrt(k).
print("max U:", traj.u_seq.max(), " max |V|:", np.abs(traj.v_seq).max())

# The immigration mean is treated as known
res = estimate(traj, spec.m_eps)
print(f"rho_hat   = {res.rho_hat:.5f}  (true 1)")
print(f"delta_hat = {res.delta_hat:.5f}  (true {spec.alpha - spec.beta:.1f})")
print(f"alpha_hat = {res.alpha_hat:.5f}, beta_hat = {res.beta_hat:.5f}")
