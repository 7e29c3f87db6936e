"""Finite noisy channels built from basis-set orthogonality, and their codes.

The core construction: channel inputs are the basis/vector index pairs (m, j),
outputs are unordered pairs of such inputs, and input (m, j) maps uniformly
onto the pairs {(m, j), (m', j')} whose vectors are orthogonal.  Everything
downstream (confusability graph, independence number, zero-error codes, the
integer encoder that scales messages by t) is exact: probabilities are
Fractions, graph facts come from exhaustive or branch-and-bound search, and
zero-error verdicts enumerate every positive-probability branch.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Dict, Iterable, List, NamedTuple, Optional, Tuple, Union

from .ks import KSBasisSet, validate_basis_set, verify_ks_property


class ChannelInput(NamedTuple):
    """Input symbol (m, j): vector j of basis m."""

    m: int
    j: int


# An output is an unordered pair of distinct inputs, stored lexicographically.
ChannelOutput = Tuple[ChannelInput, ChannelInput]


def output_pair(a: ChannelInput, b: ChannelInput) -> ChannelOutput:
    a, b = ChannelInput(*a), ChannelInput(*b)
    if a == b:
        raise ValueError(f"output pair must contain two distinct inputs, got {a} twice")
    return (a, b) if a < b else (b, a)


@dataclass(frozen=True)
class FiniteChannel:
    """Conditional distribution N(o | i) with exact rational probabilities.

    Each row is uniform over its positive-output set, every positive output
    contains its own input, and rows sum to exactly 1.
    """

    inputs: tuple
    rows: dict  # ChannelInput -> {ChannelOutput: Fraction}

    @classmethod
    def from_neighbor_sets(cls, neighbors: dict) -> "FiniteChannel":
        """Uniform channel i -> {i, i'} over the given neighbor sets."""
        rows = {}
        for i, nbrs in neighbors.items():
            i = ChannelInput(*i)
            nbrs = [ChannelInput(*n) for n in nbrs]
            if not nbrs:
                raise ValueError(f"input {i} has an empty neighbor set")
            p = Fraction(1, len(nbrs))
            rows[i] = {output_pair(i, n): p for n in nbrs}
            if len(rows[i]) != len(nbrs):
                raise ValueError(f"duplicate neighbors for input {i}")
        ch = cls(inputs=tuple(sorted(rows)), rows=rows)
        ch.validate()
        return ch

    def validate(self) -> None:
        for i in self.inputs:
            row = self.rows[i]
            if not row:
                raise ValueError(f"input {i} has no outputs")
            total = sum(row.values(), Fraction(0))
            if total != 1:
                raise ValueError(f"row for {i} sums to {total}, not 1")
            uniform = Fraction(1, len(row))
            for o, p in row.items():
                if i not in o:
                    raise ValueError(f"positive output {o} does not contain input {i}")
                if p != uniform:
                    raise ValueError(f"row for {i} is not uniform over its support")

    @property
    def outputs(self) -> tuple:
        seen = set()
        for row in self.rows.values():
            seen.update(row)
        return tuple(sorted(seen))

    def neighbors(self, i: ChannelInput) -> tuple:
        """The inputs i' appearing with i in its positive outputs."""
        i = ChannelInput(*i)
        out = []
        for o in self.rows[i]:
            out.append(o[1] if o[0] == i else o[0])
        return tuple(sorted(out))

    def prob(self, o: ChannelOutput, i: ChannelInput) -> Fraction:
        return self.rows[ChannelInput(*i)].get(o, Fraction(0))

    def output_distribution(self, i: ChannelInput) -> dict:
        return dict(self.rows[ChannelInput(*i)])

    def degree_profile(self) -> dict:
        profile: Dict[int, int] = {}
        for i in self.inputs:
            deg = len(self.rows[i])
            profile[deg] = profile.get(deg, 0) + 1
        return profile


def build_ks_channel(ks: KSBasisSet) -> FiniteChannel:
    """Channel whose input (m, j) maps uniformly onto its orthogonal pairs.

    Requires the basis set to validate and to have the one-per-basis
    orthogonality property; an input with no orthogonal partner anywhere in
    the set would have an empty row, which is rejected as degenerate.
    """
    report = validate_basis_set(ks)
    if not report.passed:
        raise ValueError(f"basis set fails validation: {report.issues[0].detail}")
    check = verify_ks_property(ks)
    if not check.holds:
        raise ValueError(
            f"basis set lacks the one-per-basis orthogonality property; "
            f"witness traversal {check.witness}"
        )
    flat = ks.all_vectors()
    ids = [ChannelInput(m, j) for m in range(ks.q) for j in range(ks.d)]
    neighbors: Dict[ChannelInput, List[ChannelInput]] = {i: [] for i in ids}
    for a in range(len(ids)):
        for b in range(a + 1, len(ids)):
            if not flat[a].raw_dot(flat[b]):
                neighbors[ids[a]].append(ids[b])
                neighbors[ids[b]].append(ids[a])
    for i, nbrs in neighbors.items():
        if not nbrs:
            raise ValueError(f"degenerate set: input {i} has no orthogonal partner")
    return FiniteChannel.from_neighbor_sets(neighbors)


# -- confusability -------------------------------------------------------


@dataclass(frozen=True)
class ConfusabilityGraph:
    """Simple undirected graph on channel inputs; edges join confusable pairs."""

    vertices: tuple
    edges: frozenset  # canonical (lo, hi) vertex pairs

    def __post_init__(self):
        vset = set(self.vertices)
        for a, b in self.edges:
            if a == b:
                raise ValueError("self loops are not allowed")
            if a not in vset or b not in vset:
                raise ValueError(f"edge ({a}, {b}) uses an unknown vertex")
            if not a < b:
                raise ValueError(f"edge ({a}, {b}) is not canonically ordered")

    def adjacent(self, a, b) -> bool:
        if a == b:
            return False
        return ((a, b) if a < b else (b, a)) in self.edges

    def degree(self, v) -> int:
        return sum(1 for e in self.edges if v in e)

    def is_independent(self, subset: Iterable) -> bool:
        subset = list(subset)
        return not any(self.adjacent(a, b) for a, b in combinations(subset, 2))


def confusability_graph(ch: FiniteChannel) -> ConfusabilityGraph:
    """Edge (i, i') iff some output has positive probability under both inputs."""
    by_output: Dict[ChannelOutput, List[ChannelInput]] = {}
    for i in ch.inputs:
        for o in ch.rows[i]:
            by_output.setdefault(o, []).append(i)
    edges = set()
    for sharers in by_output.values():
        for a, b in combinations(sorted(sharers), 2):
            edges.add((a, b))
    return ConfusabilityGraph(vertices=tuple(ch.inputs), edges=frozenset(edges))


def independence_number(g: ConfusabilityGraph) -> tuple:
    """Exact maximum independent set via branch and bound with a witness.

    Upper bounds come from a greedy clique cover of the remaining candidates
    (an independent set meets each clique at most once).  Deterministic:
    vertices are processed in sorted order and the first optimum found wins.
    """
    verts = sorted(g.vertices)
    n = len(verts)
    index = {v: i for i, v in enumerate(verts)}
    adj = [0] * n
    for a, b in g.edges:
        adj[index[a]] |= 1 << index[b]
        adj[index[b]] |= 1 << index[a]
    full = (1 << n) - 1

    def clique_cover_bound(cand: int) -> int:
        cliques: List[Tuple[int, int]] = []  # (member mask, common adjacency mask)
        rest = cand
        while rest:
            bit = rest & -rest
            v = bit.bit_length() - 1
            rest ^= bit
            for idx, (members, common) in enumerate(cliques):
                if common & bit:
                    cliques[idx] = (members | bit, common & adj[v])
                    break
            else:
                cliques.append((bit, adj[v]))
        return len(cliques)

    best_size = 0
    best_mask = 0

    def expand(cand: int, chosen: int, size: int) -> None:
        nonlocal best_size, best_mask
        if not cand:
            if size > best_size:
                best_size, best_mask = size, chosen
            return
        if size + bin(cand).count("1") <= best_size:
            return
        if size + clique_cover_bound(cand) <= best_size:
            return
        bit = cand & -cand
        v = bit.bit_length() - 1
        expand(cand & ~(adj[v] | bit), chosen | bit, size + 1)  # take v
        expand(cand & ~bit, chosen, size)  # skip v

    expand(full, 0, 0)
    witness = tuple(verts[i] for i in range(n) if best_mask >> i & 1)
    return best_size, witness


def has_independent_subset(g: ConfusabilityGraph, size: int) -> tuple:
    """Exhaustive scan over all ``size``-subsets of vertices.

    Returns (found, witness_or_None, subsets_scanned).  Intentionally naive:
    this is the enumeration oracle the independence number is checked against.
    """
    verts = sorted(g.vertices)
    scanned = 0
    for subset in combinations(verts, size):
        scanned += 1
        if g.is_independent(subset):
            return True, subset, scanned
    return False, None, scanned


# -- zero-error codes -----------------------------------------------------

Codeword = Union[ChannelInput, int]


@dataclass(frozen=True)
class ZeroErrorCode:
    """Messages with an encoder to codewords and a decoder from outputs.

    Codewords are channel inputs for a FiniteChannel, or integer wire values
    for the integer-input composed channel.  ``ties`` lists outputs whose
    decoder value came from rounding an exact half-integer estimate; they are
    surfaced for reporting, never silently dropped.
    """

    messages: tuple
    encoder: dict  # message -> codeword
    decoder: dict  # ChannelOutput -> message
    ties: tuple = ()

    def __post_init__(self):
        for msg in self.messages:
            if msg not in self.encoder:
                raise ValueError(f"encoder is not total: message {msg} missing")


@dataclass(frozen=True)
class ZeroErrorVerdict:
    status: str  # "zero_error" | "collision" | "incomplete_decoder"
    branches_checked: int
    witness: Optional[tuple] = None  # (message, output, decoded message or None)

    @property
    def is_zero_error(self) -> bool:
        return self.status == "zero_error"


def code_from_independent_set(ch: FiniteChannel, independent: Iterable) -> ZeroErrorCode:
    """Messages 0..|S|-1 on an independent set; decode each output to its owner."""
    codewords = sorted(ChannelInput(*i) for i in independent)
    g = confusability_graph(ch)
    for a, b in combinations(codewords, 2):
        if a == b:
            raise ValueError(f"independent set contains {a} twice")
        if g.adjacent(a, b):
            raise ValueError(f"set is not independent: {a} and {b} are confusable")
    encoder = {msg: cw for msg, cw in enumerate(codewords)}
    decoder = {}
    for msg, cw in encoder.items():
        for o in ch.rows[cw]:
            decoder[o] = msg
    return ZeroErrorCode(
        messages=tuple(range(len(codewords))), encoder=encoder, decoder=decoder
    )


def verify_zero_error(channel_like, code: ZeroErrorCode) -> ZeroErrorVerdict:
    """Enumerate every (message, positive-probability output) branch.

    ``channel_like`` is anything with output_distribution(codeword): a
    FiniteChannel (codewords are inputs) or an integer-input composed channel
    (codewords are wire values).  Zero error iff decoding returns the sent
    message on every branch; an undefined decoder entry is its own verdict.
    """
    checked = 0
    for msg in code.messages:
        cw = code.encoder[msg]
        for o, p in channel_like.output_distribution(cw).items():
            if p <= 0:
                continue
            checked += 1
            if o not in code.decoder:
                return ZeroErrorVerdict("incomplete_decoder", checked, (msg, o, None))
            decoded = code.decoder[o]
            if decoded != msg:
                return ZeroErrorVerdict("collision", checked, (msg, o, decoded))
    return ZeroErrorVerdict("zero_error", checked)


# -- integer encoder and the composed channel ------------------------------


@dataclass(frozen=True)
class EncoderMap:
    """Integer-to-input encoder at scale t: x = a*t + b maps to (a, b).

    For t >= d the decomposition with a in [0, q) and b in [0, d) is unique
    when it exists; all other integers map to the uniform distribution.
    """

    t: int
    q: int
    d: int

    def __post_init__(self):
        if self.t < self.d:
            raise ValueError(f"encoder scale t={self.t} must be at least d={self.d}")
        if self.q < 1 or self.d < 1:
            raise ValueError("q and d must be positive")

    def decompose(self, x: int) -> Optional[ChannelInput]:
        a, b = divmod(x, self.t)
        if 0 <= a < self.q and b < self.d:
            return ChannelInput(a, b)
        return None


def epsilon_t_distribution(x: int, enc: EncoderMap) -> dict:
    """Distribution of the encoder output on integer x, exact.

    Point mass on (a, b) when x = a*t + b with a in [q], b in [d]; otherwise
    uniform weight 1/(q*d) on every input.
    """
    hit = enc.decompose(x)
    if hit is not None:
        return {hit: Fraction(1)}
    p = Fraction(1, enc.q * enc.d)
    return {ChannelInput(a, b): p for a in range(enc.q) for b in range(enc.d)}


def nt_output_distribution(y: int, enc: EncoderMap, ch: FiniteChannel) -> dict:
    """Output distribution of the composed channel on wire value y.

    Exact composition sum_i eps_t(i | y) * N(o | i); the composed channel has
    all of Z as input domain and is always used functionally, never as a
    materialized table.
    """
    dist: Dict[ChannelOutput, Fraction] = {}
    for i, w in epsilon_t_distribution(y, enc).items():
        for o, p in ch.rows[i].items():
            dist[o] = dist.get(o, Fraction(0)) + w * p
    return dist


@dataclass(frozen=True)
class NtChannel:
    """The composed channel as a callable object, with the uniform branch cached."""

    enc: EncoderMap
    ch: FiniteChannel
    _uniform_branch: dict = field(default_factory=dict, compare=False, repr=False)

    def output_distribution(self, y: int) -> dict:
        hit = self.enc.decompose(y)
        if hit is not None:
            return dict(self.ch.rows[hit])
        if not self._uniform_branch:
            # any out-of-form y gives the same mixture; cache it once
            self._uniform_branch.update(nt_output_distribution(y, self.enc, self.ch))
        return dict(self._uniform_branch)


# -- serialization ---------------------------------------------------------

CHANNEL_FORMAT_TAG = "finite-channel/1"
GRAPH_FORMAT_TAG = "confusability-graph/1"


def _frac_str(p: Fraction) -> str:
    return f"{p.numerator}/{p.denominator}" if p.denominator != 1 else str(p.numerator)


def channel_to_json_dict(ch: FiniteChannel) -> dict:
    triples = []
    for i in ch.inputs:
        for o in sorted(ch.rows[i]):
            triples.append([list(i), [list(o[0]), list(o[1])], _frac_str(ch.rows[i][o])])
    return {
        "format": CHANNEL_FORMAT_TAG,
        "inputs": [list(i) for i in ch.inputs],
        "outputs": [[list(o[0]), list(o[1])] for o in ch.outputs],
        "probabilities": triples,
    }


def channel_from_json_dict(data: dict) -> FiniteChannel:
    if data.get("format") != CHANNEL_FORMAT_TAG:
        raise ValueError(f"unrecognized channel format: {data.get('format')!r}")
    rows: Dict[ChannelInput, Dict[ChannelOutput, Fraction]] = {
        ChannelInput(*i): {} for i in data["inputs"]
    }
    for i_raw, o_raw, p_raw in data["probabilities"]:
        i = ChannelInput(*i_raw)
        o = output_pair(ChannelInput(*o_raw[0]), ChannelInput(*o_raw[1]))
        rows[i][o] = Fraction(p_raw)
    ch = FiniteChannel(inputs=tuple(sorted(rows)), rows=rows)
    ch.validate()
    return ch


def graph_to_json_dict(g: ConfusabilityGraph) -> dict:
    return {
        "format": GRAPH_FORMAT_TAG,
        "vertices": [list(v) for v in sorted(g.vertices)],
        "edges": [[list(a), list(b)] for a, b in sorted(g.edges)],
    }


def graph_from_json_dict(data: dict) -> ConfusabilityGraph:
    if data.get("format") != GRAPH_FORMAT_TAG:
        raise ValueError(f"unrecognized graph format: {data.get('format')!r}")
    vertices = tuple(ChannelInput(*v) for v in data["vertices"])
    edges = frozenset(
        (ChannelInput(*a), ChannelInput(*b)) for a, b in data["edges"]
    )
    return ConfusabilityGraph(vertices=vertices, edges=edges)


def save_channel(ch: FiniteChannel, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(channel_to_json_dict(ch), fh, sort_keys=True)
        fh.write("\n")


def load_channel(path) -> FiniteChannel:
    with open(path, "r", encoding="utf-8") as fh:
        return channel_from_json_dict(json.load(fh))
