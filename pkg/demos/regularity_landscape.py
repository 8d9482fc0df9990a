"""
Admissible regularity triples and their distance to scaling
===========================================================

Walks the Fourier-Lebesgue exponent r from 2 down toward 1, printing the
lowest admissible triple produced by the low-regularity corollary and
the exact rational gap separating it from the scaling-critical index.
"""

from fractions import Fraction

from mcsh.spaces import admissible, cor13_values, critical_exponent, gap

print(f"{'r':>8} {'s':>10} {'l':>10} {'m':>10} {'critical s':>12} "
      f"{'gap s':>8} {'gap l':>8} {'gap m':>8} {'ok':>4}")

for r in (Fraction(2), Fraction(3, 2), Fraction(5, 4), Fraction(11, 10),
          Fraction(101, 100)):
    s, l, m = cor13_values(r)
    crit = critical_exponent(r)
    gs, gl, gm = gap(r, which="cor13")
    ok = admissible(r, s, l, m, which="cor13")["ok"]
    print(f"{str(r):>8} {str(s):>10} {str(l):>10} {str(m):>10} {str(crit):>12} "
          f"{str(gs):>8} {str(gl):>8} {str(gm):>8} {'yes' if ok else 'no':>4}")

# -- the r -> 1 endpoint: the corner values are a limit, not a member
print("\nlimit r -> 1: corner (21/16, 9/8, 9/8), gap", gap(1, which="thm11"))

# -- at r = 2 the corollary meets the threshold of the refined statement
s2, l2, m2 = cor13_values(2)
report = admissible(2, s2, l2, Fraction(1, 2), which="thm12")
print(f"r = 2 corollary triple s = {s2} admissible under the refined "
      f"statement: {report['ok']}")

# -- nudging any index below its bound produces a named violation
bad = admissible(2, Fraction(1, 2), Fraction(1, 4), Fraction(1, 2), which="thm12")
print("at s = 1/2 exactly:", bad["violations"])
