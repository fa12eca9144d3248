"""
Ground-state energies along the helium isoelectronic sequence
=============================================================

For each nuclear charge we assemble the truncated pencil A - eps*B, locate
its largest root by sign changes of the determinant and polish the
eigenvector by inverse iteration.  The energy is -eps^2 hartree.
"""

from pekeris.assembly import ORTHO, PARA
from pekeris.spectral import ground_state

omega = 12
print(f"para states, omega = {omega}")
for Z in range(1, 11):
    r = ground_state(Z, omega, PARA)
    print(f"Z={Z:2d}  dim {r.dim}  E = {r.energy:.10f}  residual {r.residual:.1e}")
# Z=1 is H-, bound because its energy lies below hydrogen's -0.5

# --- the lowest triplet S state of helium ---
r = ground_state(2, omega, ORTHO)
print(f"\nhelium, ortho: E = {r.energy:.10f}")

# --- convergence in the truncation order ---
prev = None
for om in range(4, 18, 2):
    eps = ground_state(2, om).epsilon
    change = "" if prev is None else f"  change {abs(eps - prev):.2e}"
    print(f"omega={om:2d}  eps = {eps:.12f}{change}")
    prev = eps
