"""How runs fail: resonance, unsolvable mode data, and the strict gate.

The solvers refuse to paper over structural obstructions. A rational
rotation number makes some twisted holonomy trivial and the offending mode
and loop are named; a genus-2 pair whose mode data violates the doubled-
overlap constraint trips the coboundary check; a perturbation too large
for the schedule aborts a strict run at the entry gate.
"""

import numpy as np

from circlekam import (
    CircleDiffeo,
    CoboundaryError,
    LaurentSeries,
    ResonantModeError,
    ScheduleViolationError,
    build_genus2,
    build_single_chart,
    run,
)

GOLDEN = (np.sqrt(5.0) - 1.0) / 2.0
SILVER = np.sqrt(2.0) - 1.0
TWO_PI = 2.0 * np.pi

print("== resonance: theta = 1/3 with mode 3 populated ==")
hat3 = LaurentSeries.from_coeffs({3: 1e-5, -3: -1e-5}, width=1.0)
sc = build_single_chart(1.0 / 3.0, hat3, 1.0, eta0=0.05, strict_schedule=False)
try:
    run(sc.system, sc.params)
except ResonantModeError as exc:
    print(f"raised as expected: mode {exc.mode}, loop {exc.loop}")
    print(f"twisted holonomy {exc.holonomy:.2e} = 0 mod 2 pi")

print("\n== unsolvable genus-2 mode data ==")
# equal hats on both plus edges cannot satisfy the doubled-overlap relation
hat1 = LaurentSeries.from_coeffs({1: 1e-4, -1: -1e-4}, width=1.0)
sc2 = build_genus2(
    CircleDiffeo(TWO_PI * GOLDEN, hat1),
    CircleDiffeo(TWO_PI * SILVER, hat1),
    1.0, eta0=0.05, strict_schedule=False,
)
try:
    run(sc2.system, sc2.params)
except CoboundaryError as exc:
    print(f"raised as expected: mode {exc.mode}, "
          f"residual {exc.residual:.2e} against data norm {exc.norm:.2e}")

print("\n== strict schedule: the entry gate aborts oversized input ==")
sc3 = build_single_chart(GOLDEN, hat1, 1.0, eta0=0.05)  # strict by default
try:
    run(sc3.system, sc3.params)
except ScheduleViolationError as exc:
    print(f"raised as expected: certificate '{exc.certificate}'")
    print(f"  {exc}")
print("\nthe same scenario converges with strict_schedule=False, logging")
print("the violated certificates in the trace instead (see demo 04)")
