"""Structure families, their counts, and the leading-order predictions.

Vertices are 0-based throughout the Python API.  The CLI pattern syntax is
1-based and converted on parse.
"""
from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import NamedTuple

from .errors import InvalidParameter, PatternTooLarge
from .ratefn import RateFunction

__all__ = [
    "GraphPattern",
    "FamilyKind",
    "StructureFamily",
    "LogCount",
    "parse_pattern",
    "density",
    "is_balanced",
    "automorphisms",
    "log_count",
    "theorem_scale",
    "predict",
    "expectation_bound",
    "finite_n_upper",
]

BALANCE_LIMIT = 12


@dataclass(frozen=True)
class GraphPattern:
    """A fixed simple graph H0 on vertices ``0..v-1``."""

    v: int
    edges: tuple[tuple[int, int], ...]

    def __post_init__(self):
        if self.v < 1:
            raise InvalidParameter("pattern needs at least one vertex")
        norm = []
        for a, b in self.edges:
            a, b = int(a), int(b)
            if a == b:
                raise InvalidParameter(f"pattern has a loop at vertex {a}")
            if not (0 <= a < self.v and 0 <= b < self.v):
                raise InvalidParameter(f"edge ({a},{b}) outside 0..{self.v - 1}")
            norm.append((min(a, b), max(a, b)))
        if len(set(norm)) != len(norm):
            raise InvalidParameter("pattern has duplicate edges")
        object.__setattr__(self, "edges", tuple(sorted(norm)))

    @property
    def ell(self) -> int:
        return len(self.edges)

    @property
    def density(self) -> Fraction:
        return Fraction(len(self.edges), self.v)

    def to_text(self) -> str:
        body = ",".join(f"{a + 1}-{b + 1}" for a, b in self.edges)
        return f"v={self.v};edges={body}"


def _cycle(v):
    return GraphPattern(v, tuple((i, (i + 1) % v) for i in range(v)))


def _clique(v):
    return GraphPattern(v, tuple(itertools.combinations(range(v), 2)))


NAMED_PATTERNS = {
    "edge": GraphPattern(2, ((0, 1),)),
    "triangle": _cycle(3),
    "c4": _cycle(4),
    "k4": _clique(4),
}


def parse_pattern(text: str) -> GraphPattern:
    """``triangle``/``c4``/``k4``/``edge`` or ``v=4;edges=1-2,2-3,3-1,1-4``."""
    key = text.strip().lower()
    if key in NAMED_PATTERNS:
        return NAMED_PATTERNS[key]
    fields = {}
    for part in key.split(";"):
        name, sep, value = part.partition("=")
        if not sep:
            raise InvalidParameter(f"bad pattern field {part!r}")
        fields[name.strip()] = value.strip()
    try:
        v = int(fields["v"])
        edges = []
        for item in filter(None, fields.get("edges", "").split(",")):
            a, b = item.split("-")
            edges.append((int(a) - 1, int(b) - 1))
    except (KeyError, ValueError):
        raise InvalidParameter(f"cannot parse pattern {text!r}") from None
    return GraphPattern(v, tuple(edges))


def density(p: GraphPattern) -> Fraction:
    return p.density


def is_balanced(p: GraphPattern) -> bool:
    """Brute force over vertex subsets.

    Induced subgraphs suffice: deleting edges at a fixed vertex set only
    lowers the density.
    """
    if p.v > BALANCE_LIMIT:
        raise PatternTooLarge(f"balance check limited to v <= {BALANCE_LIMIT}, got {p.v}")
    masks = [(1 << a) | (1 << b) for a, b in p.edges]
    whole = p.density
    for sub in range(1, 1 << p.v):
        inside = sum(1 for m in masks if m & sub == m)
        if Fraction(inside, bin(sub).count("1")) > whole:
            return False
    return True


def automorphisms(p: GraphPattern) -> list[tuple[int, ...]]:
    edges = set(p.edges)
    out = []
    for perm in itertools.permutations(range(p.v)):
        if all((min(perm[a], perm[b]), max(perm[a], perm[b])) in edges for a, b in p.edges):
            out.append(perm)
    return out


class FamilyKind(enum.Enum):
    MATCHING = "matching"
    TREE = "tree"
    HAMCYCLE = "hamcycle"
    PATH = "path"
    COPY = "copy"


@dataclass(frozen=True)
class StructureFamily:
    """The class C_n being optimised over.

    Matchings live on K_{n,n}; everything else on K_n.  Copies require a
    balanced pattern.
    """

    kind: FamilyKind
    n: int
    pattern: GraphPattern | None = None

    def __post_init__(self):
        if not isinstance(self.kind, FamilyKind):
            object.__setattr__(self, "kind", FamilyKind(self.kind))
        if self.n < 1:
            raise InvalidParameter("n must be positive")
        if self.kind is FamilyKind.COPY:
            if self.pattern is None:
                raise InvalidParameter("copy family needs a pattern")
            if self.pattern.ell == 0:
                raise InvalidParameter("copy pattern needs at least one edge")
            if not is_balanced(self.pattern):
                raise InvalidParameter("copy pattern must be balanced")
            if self.pattern.v > self.n:
                raise InvalidParameter("pattern has more vertices than K_n")
        elif self.pattern is not None:
            raise InvalidParameter(f"{self.kind.value} family takes no pattern")

    @classmethod
    def matching(cls, n):
        return cls(FamilyKind.MATCHING, n)

    @classmethod
    def tree(cls, n):
        return cls(FamilyKind.TREE, n)

    @classmethod
    def hamcycle(cls, n):
        return cls(FamilyKind.HAMCYCLE, n)

    @classmethod
    def path(cls, n):
        return cls(FamilyKind.PATH, n)

    @classmethod
    def copy(cls, pattern, n):
        return cls(FamilyKind.COPY, n, pattern)

    @property
    def bipartite(self) -> bool:
        return self.kind is FamilyKind.MATCHING

    @property
    def max_edges(self) -> int:
        """l = max |E(H)| as used in the expectation bound (n for paths)."""
        k = self.kind
        if k is FamilyKind.TREE:
            return self.n - 1
        if k is FamilyKind.COPY:
            return self.pattern.ell
        return self.n

    @property
    def structure_edges(self) -> int | None:
        """Exact edge count of every member, or None when it varies (paths)."""
        k = self.kind
        if k is FamilyKind.PATH:
            return None
        return self.max_edges

    @property
    def label(self) -> str:
        if self.kind is FamilyKind.COPY:
            return f"copy[{self.pattern.to_text()}]"
        return self.kind.value


class LogCount(NamedTuple):
    value: float
    is_upper_bound: bool


def _log_factorial(m: int) -> float:
    return math.fsum(math.log(k) for k in range(2, m + 1))


def log_count(f: StructureFamily) -> LogCount:
    """log |C_n|; exact for matchings, trees and Hamilton cycles, otherwise
    the union-bound upper bound (flagged)."""
    n, k = f.n, f.kind
    if k is FamilyKind.MATCHING:
        return LogCount(_log_factorial(n), False)
    if k is FamilyKind.TREE:
        return LogCount((n - 2) * math.log(n) if n >= 2 else 0.0, False)
    if k is FamilyKind.HAMCYCLE:
        if n < 3:
            raise InvalidParameter("Hamilton cycles need n >= 3")
        return LogCount(_log_factorial(n - 1) - math.log(2.0), False)
    if k is FamilyKind.PATH:
        return LogCount(1.0 + _log_factorial(n - 2), True)
    return LogCount(f.pattern.v * math.log(n), True)


def theorem_scale(f: StructureFamily) -> tuple[int, float]:
    """Multiplier and rate level: W_n ~ multiplier * Lambda*^{-1}(level)."""
    logn = math.log(f.n)
    if f.kind is FamilyKind.COPY:
        return f.pattern.ell, logn / float(f.pattern.density)
    return f.n, logn


def predict(f: StructureFamily, r: RateFunction) -> float:
    """Leading-order w.h.p. value of the optimum.

    Trees are reported at n * Lambda*^{-1}(log n) even though they have
    n - 1 edges; the gap is absorbed in the (1 + o(1)) factor.
    """
    mult, level = theorem_scale(f)
    return mult * r.inverse(level)


def expectation_bound(f: StructureFamily, r: RateFunction) -> float:
    """``l * Lambda*^{-1}(log|C_n| / l)``, an upper bound on E W_n."""
    l = f.max_edges
    return l * r.inverse(log_count(f).value / l)


def finite_n_upper(f: StructureFamily, r: RateFunction) -> float:
    """``(1 + delta) * predict`` with the union-bound slack delta.

    delta = 1/n for the n-scale families (failure probability at most
    |C_n| n^{-(n+1)}, e.g. e^{-n} for matchings at n >= 7) and
    delta = (log n)^{-1/2} for pattern copies (failure at most n^{-delta v}).
    """
    if f.kind is FamilyKind.COPY:
        delta = 1.0 / math.sqrt(math.log(f.n))
    else:
        delta = 1.0 / f.n
    return (1.0 + delta) * predict(f, r)
