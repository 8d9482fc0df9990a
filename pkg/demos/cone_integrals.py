"""
Resonance integrals on the light cone: quadrature against asymptotics
=====================================================================

The bilinear estimates hinge on weighted integrals over the set where
two frequencies add up on the cone.  This script evaluates the elliptic
branch numerically for a range of (tau, |xi|), compares with the
closed-form power law, and shows the documented failure modes.
"""

import numpy as np

from mcsh.errors import DivergenceError
from mcsh.nullforms import (
    DeltaIntegralSpec,
    delta_integral,
    delta_integral_asymptotic,
    far_branch_integral,
)

# -- r = 2 weights: (p, q) = (2, 1), where the exact answer is
#    4 pi / (tau^2 - xi^2); the tabulated asymptotic keeps only the power law
print(f"{'tau':>8} {'|xi|':>8} {'quadrature':>12} {'4pi/(t^2-x^2)':>14} {'vs asymp':>10}")
for tau, xi in ((2.0, 1.0), (3.0, 1.5), (6.0, 1.0), (12.0, 2.0)):
    spec = DeltaIntegralSpec(("+", "+"), 2.0, 1.0, tau, xi)
    val = delta_integral(spec)
    exact = 4.0 * np.pi / (tau**2 - xi**2)
    ratio = val / delta_integral_asymptotic(spec, 2.0)
    print(f"{tau:8.2f} {xi:8.2f} {val:12.6f} {exact:14.6f} {ratio:10.3f}")

# -- hyperbolic branch: the two cone frequencies carry opposite signs,
#    and the integration domain flips to |tau| < |xi|
spec = DeltaIntegralSpec(("+", "-"), 2.0, 1.0, 0.8, 2.0)
print(f"\nhyperbolic (tau=0.8, xi=2.0): {delta_integral(spec):.6f}")

# -- the far branch converges only for r > 1; at r = 1 the tail carries
#    a logarithm and the code refuses rather than returning a number
try:
    far_branch_integral(1.0, 2.0, 1.0)
except DivergenceError as exc:
    print(f"\nfar branch at r = 1 raises: {exc}")
print(f"far branch at r = 1.5: {far_branch_integral(1.0, 2.0, 1.5):.6f}")

# -- too little decay makes even the near-cone integral infinite
try:
    delta_integral(DeltaIntegralSpec(("+", "+"), 1.5, 0.5, 3.0, 1.0))
except DivergenceError as exc:
    print(f"p + q <= 2 raises: {exc}")
