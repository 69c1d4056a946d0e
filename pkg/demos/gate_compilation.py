"""Compile non-Gaussian phase gates and watch the error fall with K.

A cubic phase exp(i gamma x^3) is split into K repeated blocks of linear
factors; the error on the low-energy block falls like 1/K.  The two-mode
quartic exp(i pi H1 Hc) is a product of four cross-quadratic exponentials
and only enters the 1/K regime for K in the hundreds.
"""

from cvqml.gates import PolyPhaseSpec, compile_poly_phase, compile_quartic_US, fit_loglog_slope

Ks = [4, 8, 16, 32]
errs = [compile_poly_phase(PolyPhaseSpec(0.1, (0, 0, 0, 1), K), 16).error() for K in Ks]
for K, e in zip(Ks, errs):
    print(f"cubic   K={K:<4} error={e:.3e}")
print(f"cubic slope {fit_loglog_slope(Ks, errs):.3f}")

Ks = [64, 128, 256]
errs = [compile_quartic_US(K, 8, route="trotter").error() for K in Ks]
for K, e in zip(Ks, errs):
    print(f"quartic K={K:<4} error={e:.3e}")
print(f"quartic slope {fit_loglog_slope(Ks, errs):.3f}")
