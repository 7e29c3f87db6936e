"""Bundles of orthonormal bases with the one-per-basis orthogonality property.

A basis set here is q orthonormal bases of C^d.  The property that drives the
whole channel construction: every traversal that picks one vector from each
basis contains at least one orthogonal pair.  ``verify_ks_property`` decides
this by exhaustively scanning all d^q minimal traversals (any superset of a
traversal inherits the property, so minimal traversals suffice).

The bundled instance is the classic set of 24 real rays in C^4 (components in
{0, +-1}) partitioned into six orthonormal bases; it ships as data under
``entwit/data`` and is re-verified by the test suite, never trusted.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from importlib import resources
from itertools import product
from typing import Optional, Sequence

from .exact import ComplexFraction, Vector, as_fraction, is_orthogonal

BUNDLED_SET_RESOURCE = "ks_6_4_peres.json"


@dataclass(frozen=True)
class KSBasisSet:
    """q orthonormal bases of C^d; ``bases[m][j]`` is vector j of basis m."""

    q: int
    d: int
    bases: tuple
    label: str = ""

    def __post_init__(self):
        if self.q < 1:
            raise ValueError("need at least one basis")
        if self.d < 2:
            raise ValueError("ambient dimension must be at least 2")
        if len(self.bases) != self.q:
            raise ValueError("basis count does not match q")
        for basis in self.bases:
            if len(basis) != self.d:
                raise ValueError("each basis must contain exactly d vectors")
            for v in basis:
                if v.dim != self.d:
                    raise ValueError("vector dimension does not match d")

    def vector(self, m: int, j: int) -> Vector:
        return self.bases[m][j]

    def all_vectors(self) -> list:
        return [v for basis in self.bases for v in basis]


@dataclass(frozen=True)
class BasisIssue:
    """First orthonormality violation found in one basis."""

    m: int
    pair: tuple  # (j, j'); j == j' flags a norm violation
    detail: str


@dataclass(frozen=True)
class ValidationReport:
    passed: bool
    issues: tuple  # BasisIssue per failing basis, first violation only

    def issue_for(self, m: int) -> Optional[BasisIssue]:
        for issue in self.issues:
            if issue.m == m:
                return issue
        return None


@dataclass(frozen=True)
class KSCheckResult:
    holds: bool
    traversals_checked: int
    witness: Optional[tuple]  # traversal (m, j) pairs with no orthogonal pair


def validate_basis_set(ks: KSBasisSet, tol: Fraction = Fraction(0)) -> ValidationReport:
    """Check that every basis is orthonormal; report first violation per basis."""
    issues = []
    for m, basis in enumerate(ks.bases):
        issue = None
        for j, v in enumerate(basis):
            nsq = v.norm_sq()
            if tol == 0:
                bad_norm = nsq != 1
            else:
                bad_norm = abs(nsq - 1) > 2 * as_fraction(tol)
            if bad_norm:
                issue = BasisIssue(m, (j, j), f"vector {j} has squared norm {nsq}")
                break
            for j2 in range(j + 1, len(basis)):
                if not is_orthogonal(v, basis[j2], tol):
                    issue = BasisIssue(
                        m, (j, j2), f"vectors {j} and {j2} are not orthogonal"
                    )
                    break
            if issue:
                break
        if issue:
            issues.append(issue)
    return ValidationReport(passed=not issues, issues=tuple(issues))


def verify_ks_property(ks: KSBasisSet) -> KSCheckResult:
    """Exhaustively scan all d^q one-per-basis traversals.

    Holds iff every traversal contains an orthogonal pair; otherwise the
    returned witness is a traversal with no such pair.  Requires the set to
    validate first (orthogonality is only meaningful between unit vectors).
    """
    report = validate_basis_set(ks)
    if not report.passed:
        raise ValueError(f"basis set fails validation: {report.issues[0].detail}")
    q, d = ks.q, ks.d
    flat = ks.all_vectors()
    # orthogonality bitmask per vector id (id = m*d + j)
    n = q * d
    masks = [0] * n
    for a in range(n):
        for b in range(a + 1, n):
            if not flat[a].raw_dot(flat[b]):
                masks[a] |= 1 << b
                masks[b] |= 1 << a
    checked = 0
    for combo in product(range(d), repeat=q):
        checked += 1
        chosen = 0
        has_pair = False
        for m, j in enumerate(combo):
            vid = m * d + j
            if masks[vid] & chosen:
                has_pair = True
                break
            chosen |= 1 << vid
        if not has_pair:
            witness = tuple((m, j) for m, j in enumerate(combo))
            return KSCheckResult(holds=False, traversals_checked=checked, witness=witness)
    return KSCheckResult(holds=True, traversals_checked=checked, witness=None)


def conjugate_basis(basis: Sequence[Vector]) -> tuple:
    """Entrywise complex conjugate of each vector; orthonormality is preserved."""
    return tuple(v.conjugate() for v in basis)


# -- file format ---------------------------------------------------------
#
# JSON with fields:
#   format: "ks-basis-set/1"
#   label:  free-form provenance string
#   q, d:   counts
#   denominator: optional rational (int or "p/q") dividing every entry
#   bases:  q arrays of d vectors; a vector is d entries [re, im] with
#           int or "p/q" rational parts
# Vectors are stored as unnormalized directions; the loader normalizes each
# one exactly (components divided by their own norm).

FORMAT_TAG = "ks-basis-set/1"


def _entry_to_json(c: ComplexFraction):
    def num(f: Fraction):
        return int(f) if f.denominator == 1 else f"{f.numerator}/{f.denominator}"

    return [num(c.re), num(c.im)]


def basis_set_to_json_dict(ks: KSBasisSet) -> dict:
    return {
        "format": FORMAT_TAG,
        "label": ks.label,
        "q": ks.q,
        "d": ks.d,
        "bases": [
            [[_entry_to_json(c) for c in v.entries] for v in basis]
            for basis in ks.bases
        ],
    }


def basis_set_from_json_dict(data: dict) -> KSBasisSet:
    if data.get("format") != FORMAT_TAG:
        raise ValueError(f"unrecognized basis-set format: {data.get('format')!r}")
    q = int(data["q"])
    d = int(data["d"])
    den = as_fraction(data.get("denominator", 1))
    bases = []
    for raw_basis in data["bases"]:
        vectors = []
        for raw_vec in raw_basis:
            comps = [ComplexFraction(as_fraction(re), as_fraction(im)) for re, im in raw_vec]
            vectors.append(Vector.from_components(comps, denominator=den))
        bases.append(tuple(vectors))
    return KSBasisSet(q=q, d=d, bases=tuple(bases), label=data.get("label", ""))


def save_basis_set(ks: KSBasisSet, path) -> None:
    data = basis_set_to_json_dict(ks)
    lines = [
        "{",
        f' "format": {json.dumps(data["format"])},',
        f' "label": {json.dumps(data["label"])},',
        f' "q": {data["q"]},',
        f' "d": {data["d"]},',
        ' "bases": [',
    ]
    for m, basis in enumerate(data["bases"]):
        lines.append("  [")
        for j, vec in enumerate(basis):
            comma = "," if j + 1 < len(basis) else ""
            lines.append(f"   {json.dumps(vec, separators=(',', ':'))}{comma}")
        lines.append("  ]," if m + 1 < len(data["bases"]) else "  ]")
    lines += [" ]", "}"]
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def load_basis_set(path) -> KSBasisSet:
    with open(path, "r", encoding="utf-8") as fh:
        return basis_set_from_json_dict(json.load(fh))


def bundled_basis_set() -> KSBasisSet:
    """The packaged (q, d) = (6, 4) set of 24 real rays in six bases."""
    text = resources.files("entwit.data").joinpath(BUNDLED_SET_RESOURCE).read_text()
    return basis_set_from_json_dict(json.loads(text))
