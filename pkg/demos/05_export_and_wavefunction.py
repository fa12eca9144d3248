"""
Exporting the pencil and evaluating the wave function
=====================================================

The integer matrices can be written in Matrix Market format for use in
other software.  The eigenvector, together with the Laguerre basis, gives
the wave function at any triangle of distances.
"""

import tempfile

import numpy as np

from pekeris.assembly import export_pencil, import_pencil
from pekeris.spectral import evaluate_wavefunction, ground_state, pencil_for

p = pencil_for(2, 8)
with tempfile.TemporaryDirectory() as d:
    paths = export_pencil(p, d)
    print("wrote", sorted(x.name for x in paths.values()))
    q = import_pencil(paths["manifest"])
    print("round trip exact:", q.entries == p.entries)

r = ground_state(2, 8)
print(f"\nE = {r.energy:.10f}")
for r12 in np.linspace(0.2, 2.0, 5):
    psi = evaluate_wavefunction(r, 1.0, 1.0, r12)
    print(f"psi(1, 1, {r12:.2f}) = {psi:+.6e}")
