"""
The determinant as an exact polynomial
======================================

det(A - eps*B) has integer coefficients.  We compute it modulo many word-size
primes, interpolate in eps, and glue the images together with the Chinese
remainder theorem.  A fraction-free elimination over Z[eps] serves as an
independent check on a small case.
"""

from pekeris.charpoly import bareiss_charpoly, charpoly_exact, cross_check_roots
from pekeris.spectral import pencil_for

small = pencil_for(2, 4)
cp = charpoly_exact(small)
print(f"omega=4: degree {cp.degree}, {len(cp.primes)} primes, "
      f"matches fraction-free expansion: {cp.coefficients == bareiss_charpoly(small)}")
print("largest real root vs numeric pencil root:", cross_check_roots(cp, small))

# Larger truncations take longer; omega=6 runs in a second or two.
p = pencil_for(2, 6)
cp = charpoly_exact(p)
print(f"\nomega=6: degree {cp.degree}, largest coefficient has {cp.max_digits()} digits")
print("leading coefficient:", cp.coefficients[-1])
