"""Prepare a state proportional to A^-1 b with two squeezed resources.

After exp(i gamma A p_R p_S), record q_R and keep only runs whose second
resource lands in a narrow window around 0.  The data register is then
close to A^-1 b; the post-selection probability shrinks with the window.
"""

import numpy as np

from cvqml import oracles
from cvqml.measurement import PostSelectionWindow
from cvqml.qml import ClassicalVector, matrix_invert

A = np.array([[2.0, 0.5], [0.5, 1.0]])
b = ClassicalVector.unit([1.0, 0.3])
y = np.linalg.solve(A, b.entries)
print("classical solution direction:", np.round(y / np.linalg.norm(y), 5))

for half in (0.4, 0.2, 0.1):
    rho, rep = matrix_invert(A, b, gamma=5.0, s=20.0, window=PostSelectionWindow(0.0, half))
    print(f"window +-{half:<4} success={rep.success_probability:.4f} "
          f"infidelity={rep.residuals['infidelity']:.2e} "
          f"averaged over q_R={rep.residuals['infidelity_outcome_averaged']:.2e}")

fit = oracles.success_rate_exponent(20.0, 5.0, np.linalg.eigvalsh(A))
print(f"success mass ~ eps^{fit.slope:.3f} when gamma grows as eps^-1/2")
