"""Exact complex-rational scalars and vectors.

All geometry in this package runs on exact arithmetic: a vector is stored as
Gaussian-rational components together with a rational ``scale`` s, and denotes
components / sqrt(s).  Inner products between such vectors are rational up to
a common sqrt factor, so orthogonality, squared overlaps and measurement
probabilities are decided exactly, with no tolerances.  Floats never enter.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Sequence, Union

RationalLike = Union[int, Fraction, str]


def as_fraction(x) -> Fraction:
    """Coerce to Fraction, rejecting floats (they would poison exactness)."""
    if isinstance(x, bool):
        raise TypeError("cannot convert bool to an exact scalar")
    if isinstance(x, float):
        raise TypeError(f"refusing float {x!r}; pass int, Fraction or string")
    return Fraction(x)


class ComplexFraction:
    """A complex number with Fraction real and imaginary parts."""

    __slots__ = ("re", "im")

    def __init__(self, re: RationalLike = 0, im: RationalLike = 0):
        object.__setattr__(self, "re", as_fraction(re))
        object.__setattr__(self, "im", as_fraction(im))

    def __setattr__(self, name, value):
        raise AttributeError("ComplexFraction is immutable")

    @staticmethod
    def coerce(x) -> "ComplexFraction":
        if isinstance(x, ComplexFraction):
            return x
        return ComplexFraction(as_fraction(x))

    def __add__(self, other):
        other = ComplexFraction.coerce(other)
        return ComplexFraction(self.re + other.re, self.im + other.im)

    __radd__ = __add__

    def __sub__(self, other):
        other = ComplexFraction.coerce(other)
        return ComplexFraction(self.re - other.re, self.im - other.im)

    def __rsub__(self, other):
        return ComplexFraction.coerce(other) - self

    def __mul__(self, other):
        other = ComplexFraction.coerce(other)
        return ComplexFraction(
            self.re * other.re - self.im * other.im,
            self.re * other.im + self.im * other.re,
        )

    __rmul__ = __mul__

    def __neg__(self):
        return ComplexFraction(-self.re, -self.im)

    def conjugate(self) -> "ComplexFraction":
        return ComplexFraction(self.re, -self.im)

    def abs_sq(self) -> Fraction:
        return self.re * self.re + self.im * self.im

    def __bool__(self) -> bool:
        return bool(self.re) or bool(self.im)

    def __eq__(self, other) -> bool:
        if isinstance(other, (int, Fraction)):
            other = ComplexFraction(other)
        if not isinstance(other, ComplexFraction):
            return NotImplemented
        return self.re == other.re and self.im == other.im

    def __hash__(self):
        return hash((self.re, self.im))

    def __complex__(self) -> complex:
        return complex(float(self.re), float(self.im))

    def __reduce__(self):
        return (ComplexFraction, (self.re, self.im))

    def __repr__(self) -> str:
        if not self.im:
            return f"{self.re}"
        if not self.re:
            return f"{self.im}i"
        sign = "+" if self.im >= 0 else "-"
        return f"({self.re}{sign}{abs(self.im)}i)"


ONE = ComplexFraction(1)
ZERO = ComplexFraction(0)


class Vector:
    """An exact vector ``entries / sqrt(scale)`` over ComplexFraction entries.

    The sqrt never has to be evaluated: every quantity this package consumes
    (orthogonality, squared overlaps, squared norms, measurement
    probabilities) is rational in the entries and the scale.
    """

    __slots__ = ("entries", "scale")

    def __init__(self, entries: Iterable, scale: RationalLike = 1):
        object.__setattr__(
            self, "entries", tuple(ComplexFraction.coerce(e) for e in entries)
        )
        s = as_fraction(scale)
        if s <= 0:
            raise ValueError(f"vector scale must be positive, got {s}")
        object.__setattr__(self, "scale", s)
        if not self.entries:
            raise ValueError("vector must have at least one entry")

    def __setattr__(self, name, value):
        raise AttributeError("Vector is immutable")

    @classmethod
    def from_components(cls, components: Sequence, denominator: RationalLike = 1) -> "Vector":
        """Unit vector in the direction of ``components / denominator``.

        The scale is set to the squared norm of the raw components, so the
        result is exactly normalized without evaluating any square root.
        """
        den = as_fraction(denominator)
        if den == 0:
            raise ValueError("denominator must be nonzero")
        coerced = [ComplexFraction.coerce(c) for c in components]
        raw = [ComplexFraction(c.re / den, c.im / den) for c in coerced]
        nsq = sum((c.abs_sq() for c in raw), Fraction(0))
        if nsq == 0:
            raise ValueError("cannot normalize the zero vector")
        return cls(raw, scale=nsq)

    @classmethod
    def literal(cls, components: Sequence) -> "Vector":
        """Vector whose denoted value is exactly the given components."""
        return cls(components, scale=1)

    @classmethod
    def standard_basis_vector(cls, index: int, dim: int) -> "Vector":
        return cls([1 if i == index else 0 for i in range(dim)], scale=1)

    @property
    def dim(self) -> int:
        return len(self.entries)

    def raw_dot(self, other: "Vector") -> ComplexFraction:
        """Sesquilinear sum(conj(self_k) * other_k) over raw entries.

        The denoted inner product is this divided by sqrt(self.scale *
        other.scale); in particular it is zero iff this is zero.
        """
        if self.dim != other.dim:
            raise ValueError(f"dimension mismatch: {self.dim} vs {other.dim}")
        acc = ZERO
        for a, b in zip(self.entries, other.entries):
            acc = acc + a.conjugate() * b
        return acc

    def norm_sq(self) -> Fraction:
        return sum((c.abs_sq() for c in self.entries), Fraction(0)) / self.scale

    def is_zero(self) -> bool:
        return not any(self.entries)

    def overlap_sq(self, other: "Vector") -> Fraction:
        """Squared fidelity |<self|other>|^2 between the normalized rays."""
        nsq = self.norm_sq() * other.norm_sq()
        if nsq == 0:
            raise ValueError("overlap with a zero vector is undefined")
        raw = self.raw_dot(other).abs_sq()
        return raw / (self.scale * other.scale * nsq)

    def conjugate(self) -> "Vector":
        return Vector([c.conjugate() for c in self.entries], self.scale)

    def normalized(self) -> "Vector":
        nsq_raw = sum((c.abs_sq() for c in self.entries), Fraction(0))
        if nsq_raw == 0:
            raise ValueError("cannot normalize the zero vector")
        return Vector(self.entries, scale=nsq_raw)

    def same_ray(self, other: "Vector") -> bool:
        """True iff the two vectors agree up to a global phase."""
        return self.overlap_sq(other) == 1

    def to_complex(self) -> tuple:
        import math

        root = math.sqrt(float(self.scale))
        return tuple(complex(c) / root for c in self.entries)

    def __reduce__(self):
        return (Vector, (self.entries, self.scale))

    def __eq__(self, other) -> bool:
        if not isinstance(other, Vector):
            return NotImplemented
        return self.entries == other.entries and self.scale == other.scale

    def __hash__(self):
        return hash((self.entries, self.scale))

    def __repr__(self) -> str:
        body = ", ".join(repr(c) for c in self.entries)
        if self.scale == 1:
            return f"Vector([{body}])"
        return f"Vector([{body}] / sqrt({self.scale}))"


def decimal_str(x: Fraction, sigfigs: int = 12) -> str:
    """Deterministic decimal rendering of an exact fraction (trimmed zeros)."""
    from decimal import Decimal, localcontext

    with localcontext() as ctx:
        ctx.prec = sigfigs
        dec = Decimal(x.numerator) / Decimal(x.denominator)
    text = format(dec, "f")
    if "." in text:
        text = text.rstrip("0").rstrip(".")
    return text if text not in ("-0", "") else "0"


def is_orthogonal(v: Vector, w: Vector, tol: Fraction = Fraction(0)) -> bool:
    """True iff |<v|w>| <= tol; exact (tol = 0 compares the raw dot to zero)."""
    raw = v.raw_dot(w)
    if tol == 0:
        return not raw
    return v.overlap_sq(w) <= as_fraction(tol) ** 2


def complete_orthonormal_basis(seeds: Sequence[Vector], dim: int) -> list:
    """Extend pairwise-orthogonal unit seed vectors to an orthonormal basis.

    Orthogonalizes the standard basis against the seeds (Gram-Schmidt in the
    raw-entry gauge; every intermediate stays Gaussian-rational) and drops
    exactly-dependent vectors.  Raises if the seeds are not orthonormal.
    """
    for s in seeds:
        if s.dim != dim:
            raise ValueError("seed dimension mismatch")
        if s.norm_sq() != 1:
            raise ValueError("seed vectors must be unit norm")
    for i in range(len(seeds)):
        for j in range(i + 1, len(seeds)):
            if seeds[i].raw_dot(seeds[j]):
                raise ValueError("seed vectors must be pairwise orthogonal")

    basis = list(seeds)
    for k in range(dim):
        if len(basis) == dim:
            break
        w = Vector.standard_basis_vector(k, dim)
        residual = list(w.entries)
        for u in basis:
            # projection coefficient of w on unit u, in w's raw gauge
            coeff = u.raw_dot(w)
            inv = Fraction(1) / u.scale
            for idx in range(dim):
                residual[idx] = residual[idx] - coeff * u.entries[idx] * inv
        if not any(residual):
            continue  # dependent on the span so far
        basis.append(Vector(residual, scale=w.scale).normalized())
    if len(basis) != dim:
        raise ValueError("basis completion failed to reach full dimension")
    return basis


def measurement_probabilities(state: Vector, basis: Sequence[Vector]) -> list:
    """Born probabilities of a unit state in an orthonormal basis, exact."""
    return [b.overlap_sq(state) for b in basis]


def measure_first_subsystem(state: Vector, basis: Sequence[Vector]) -> list:
    """Project subsystem 1 of a bipartite pure state onto a local basis.

    ``state`` lives on C^a x C^b (entries indexed i1*b + i2) and ``basis``
    is an orthonormal basis of C^a.  Returns a list of
    (outcome_index, probability, residual_on_subsystem_2) with residuals
    normalized; zero-probability branches are dropped.
    """
    a = len(basis)
    if a == 0 or basis[0].dim != a:
        raise ValueError("basis must be a full orthonormal basis of subsystem 1")
    if state.dim % a != 0:
        raise ValueError("state dimension is not a multiple of the basis dimension")
    b = state.dim // a
    branches = []
    for j, u in enumerate(basis):
        raw = []
        for i2 in range(b):
            acc = ZERO
            for i1 in range(a):
                acc = acc + u.entries[i1].conjugate() * state.entries[i1 * b + i2]
            raw.append(acc)
        residual = Vector(raw, scale=u.scale * state.scale)
        prob = residual.norm_sq()
        if prob == 0:
            continue
        branches.append((j, prob, residual.normalized()))
    return branches
