"""
A solvable sanity check
=======================

Switch off the electron-electron repulsion and the problem separates into
two hydrogen atoms.  The ground state is exp(-Z(r1 + r2)) with E = -Z^2, so
the pencil must be singular at eps = Z with the constant Laguerre mode as
its kernel.
"""

from pekeris.assembly import PARA, assemble_pencil, enumerate_basis
from pekeris.pipeline import PipelineConfig, perimetric_operator
from pekeris.spectral import find_largest_root
from pekeris.transfer import pekeris_recurrence

rec = pekeris_recurrence(perimetric_operator(PipelineConfig(interaction=False)), check=False)
print(f"{len(rec.stencil)} stencil terms without the repulsion")

for Z in (1, 2, 5, 10):
    p = assemble_pencil(rec, enumerate_basis(4, PARA), Z)
    A, B = p.dense_int()
    # first column of A - Z*B vanishes identically, in exact integers
    kernel = all(A[r][0] == Z * B[r][0] for r in range(p.dim))
    root = find_largest_root(p)
    print(f"Z={Z:2d}  exact kernel: {kernel}  largest root {root.epsilon:.12f}")
