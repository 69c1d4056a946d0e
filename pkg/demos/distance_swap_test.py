"""Estimate |u - mean(v_i)|^2 from the sign of a homodyne outcome.

A bright coherent test mode interferes with a vacuum mode on a balanced
beamsplitter after an exponential-swap gadget.  The imbalance between
positive and negative p outcomes is proportional to the distance.
"""

import numpy as np

from cvqml import oracles
from cvqml.qml import ClassicalVector, DistanceProblem, distance_estimate

rng = np.random.default_rng(7)
u = ClassicalVector(np.array([0.6, 0.8]))
vs = (ClassicalVector(np.array([1.0, 0.0])), ClassicalVector(np.array([0.0, -1.0])))
prob = DistanceProblem(u, vs)
print("classical D^2 =", round(prob.distance2, 6))

for beta in (1.0, 2.0, 4.0):
    est, rep = distance_estimate(prob, beta, shots=50_000, rng=rng)
    se = rep.estimates["D2_standard_error"]
    print(f"beta={beta}: sd(beta)={oracles.sign_difference(beta):.5f}  D2_hat={est:.4f} +- {se:.4f}")
