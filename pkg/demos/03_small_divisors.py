"""Small divisors: mode-by-mode coboundary solves and their amplification.

For a single chart with a self-loop of phase 2 pi theta, the mode-n system
is one equation with divisor e^{2 pi i n theta} - 1, so the amplification
spectrum is the classical 1 / |2 sin(pi n theta)|. A power-law fit across
the spectrum yields the constant C0 that the iteration schedule consumes.
"""

import numpy as np

from circlekam import (
    Edge,
    Nerve,
    UnitaryFlatBundle,
    amplification_spectrum,
    fit_diophantine,
    solve_mode,
)

GOLDEN = (np.sqrt(5.0) - 1.0) / 2.0

nerve = Nerve(("U0",), (Edge("U0", "U0", "loop"),))
bundle = UnitaryFlatBundle(nerve, (2.0 * np.pi * GOLDEN,))

print("== one mode solve, against the closed form ==")
sol = solve_mode(bundle, 1, [1.0])
closed = 1.0 / (np.exp(2j * np.pi * GOLDEN) - 1.0)
print(f"a_0 = {sol.a[0]:.8f}, closed form {closed:.8f}")

print("\n== the golden-mean spectrum vs 1/|2 sin(pi n theta)| ==")
spectrum = amplification_spectrum(bundle, 64)
worst = max(
    abs(a - 1.0 / abs(2.0 * np.sin(np.pi * n * GOLDEN)))
    / (1.0 / abs(2.0 * np.sin(np.pi * n * GOLDEN)))
    for n, a in spectrum.items()
)
print(f"worst relative deviation over |n| <= 64: {worst:.2e}")
peaks = sorted(spectrum, key=spectrum.get)[-6:]
print("largest amplifications sit on denominators of the continued fraction:")
for n in sorted(peaks, key=abs):
    print(f"  n = {n:+4d}: A_n = {spectrum[n]:9.3f}")

print("\n== power-law fit A_n <= C0 |n|^(mu-1) ==")
fit = fit_diophantine(spectrum, mu=2.0)
print(f"C0 = {fit.c0:.6f} attained at n = {fit.argmax_mode}, "
      f"superpolynomial growth: {fit.superpolynomial}")

print("\n== a synthetic spectrum no power law can cap ==")
liouville_like = {n: float(np.exp(abs(n))) for n in range(-32, 33) if n != 0}
bad_fit = fit_diophantine(liouville_like, mu=2.0)
print(f"C0 = {bad_fit.c0:.3e} at n = {bad_fit.argmax_mode}, "
      f"superpolynomial growth: {bad_fit.superpolynomial}")
