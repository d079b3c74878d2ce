"""
Extending the hierarchy by the wave function
============================================

Solve for the dt_k in the coframe eta^{m,j}, check that the extended
connection is flat, and reduce it back to the heat hierarchy.
"""

from heatext.forms import (
    apply_constraint,
    build_hat_omega,
    build_omega,
    example_0wave,
    reduce_to_heat,
    solve_wave_extension,
    verify_flatness,
)
from heatext.window import TruncationWindow

ext = solve_wave_extension(TruncationWindow(M=2, K=3, N=5))
print(ext.to_text())

report = verify_flatness(ext)
print(f"d(dt_k) = 0 on {len(report.checked)} certified wedge keys")

# the constraint keeps only eta^{0,k}, which become the plain dt_k
print([apply_constraint(f).to_text() for f in ext.dt])
print(reduce_to_heat(build_hat_omega(ext, 4)) == build_omega(4))

# a wave with only two times forces the higher times to freeze
print(example_0wave(6).to_text())
