"""latline: lattice-flow and Diophantine-scan numerics for planar lines.

The library makes the constructive side of multiplicative Diophantine
approximation on a line alpha = a*beta + b computable at desk scale:

* exact scalars (rationals, quadratic surds, big floats) and the
  distance-to-nearest-integer primitive (:mod:`latline.exactnum`);
* the flow matrices u, a(t,s), xi, d, v and their exact factorisation /
  conjugation identities over an exponential-polynomial ring
  (:mod:`latline.flows`, :mod:`latline.exppoly`);
* unimodular lattices in R^3: certified sup-norm shortest vectors, cusp
  depth Delta, Mahler compacta, LLL, reduced successive minima and Siegel
  reduction (:mod:`latline.lattice3`);
* Diophantine exponent scans, Strombergsson's b_s, Gallagher-style running
  minima and psi-counting (:mod:`latline.dioph`);
* dual Bohr sets, their generalized-arithmetic-progression covers with
  certified containment, and rational-point counts near lines
  (:mod:`latline.bohr`);
* the pruned excursion-interval construction B*(t,s), quasi-independence
  statistics, orbit averages and logarithm-law excursions
  (:mod:`latline.dynlab`);
* a batch CLI with reproducible CSV + JSON manifests (:mod:`latline.cli`).
"""

from ._context import precision_bits, set_precision_bits, workprec
from .exactnum import BigFloat, Rational, Real, Surd, as_real, cf_expansion, frac_dist
from .exppoly import ExpPoly, LinForm, S, T

__version__ = "0.1.0"

__all__ = [
    "precision_bits",
    "set_precision_bits",
    "workprec",
    "Real",
    "Rational",
    "Surd",
    "BigFloat",
    "as_real",
    "frac_dist",
    "cf_expansion",
    "ExpPoly",
    "LinForm",
    "T",
    "S",
    "__version__",
]
