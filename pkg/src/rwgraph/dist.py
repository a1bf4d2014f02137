"""Symmetric edge-weight laws.

Every law here is symmetric about 0, so the upper tail ``P(X > t)`` on
``t >= 0`` determines it.  The catalog is closed: Gaussian, Laplace,
Uniform, Rademacher, a step-tail law without regular upper tails, and the
degenerate point mass at 0.

Sampling goes through :meth:`Distribution.from_uniform`, an inverse-CDF map
from uniforms in (0, 1).  That keeps every variate a pure function of the
uniform it came from, which the counter-based instance generator relies on.
"""
from __future__ import annotations

import bisect
import enum
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy import special

from .errors import DomainError, InvalidParameter

__all__ = [
    "Kind",
    "StepTailSpec",
    "Distribution",
    "make_distribution",
    "parse_dist",
    "sample",
    "tail",
    "log_mgf",
    "ess_sup",
    "regularity_profile",
]

LOG2 = math.log(2.0)


class Kind(enum.Enum):
    GAUSSIAN = "gaussian"
    LAPLACE = "laplace"
    UNIFORM = "uniform"
    RADEMACHER = "rademacher"
    STEPTAIL = "steptail"
    ZERO = "zero"


def _log1mexp(x: float) -> float:
    """log(1 - exp(-x)) for x > 0, accurate at both ends."""
    if x <= LOG2:
        return math.log(-math.expm1(-x))
    return math.log1p(-math.exp(-x))


@dataclass(frozen=True)
class StepTailSpec:
    """Atoms ``+-x[k-1]`` with ``P(X > t) = exp(-y[k])`` on ``[x[k-1], x[k])``.

    ``x`` holds x_1 < ... < x_K and ``y`` holds y_0 = log 2 < y_1 < ... < y_K.
    The law is truncated at x_K: the last atom absorbs the residual mass
    ``exp(-y_K)`` so the tail is 0 from x_K on.  The y values are the negated
    log-tail levels; they are never exponentiated as positive numbers.
    """

    x: tuple[float, ...]
    y: tuple[float, ...]

    def __post_init__(self):
        x = tuple(float(v) for v in self.x)
        y = tuple(float(v) for v in self.y)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)
        if len(x) < 3:
            raise InvalidParameter("StepTail needs at least 3 atoms (K >= 3)")
        if len(y) != len(x) + 1:
            raise InvalidParameter("StepTail needs len(y) == len(x) + 1 (y_0..y_K)")
        if x[0] <= 0 or any(b <= a for a, b in zip(x, x[1:])):
            raise InvalidParameter("StepTail x-sequence must be positive and strictly increasing")
        if abs(y[0] - LOG2) > 1e-12:
            raise InvalidParameter("StepTail y-sequence must start at y_0 = log 2")
        if any(b <= a for a, b in zip(y, y[1:])) or not all(math.isfinite(v) for v in y):
            raise InvalidParameter("StepTail y-sequence must be finite and strictly increasing")

    @classmethod
    def default(cls, K: int = 12) -> "StepTailSpec":
        """x_k = k and y_k = 2**(k*k), truncated after K atoms."""
        if K < 3:
            raise InvalidParameter("StepTail needs at least 3 atoms (K >= 3)")
        x = tuple(float(k) for k in range(1, K + 1))
        y = (LOG2,) + tuple(float(2 ** (k * k)) for k in range(1, K + 1))
        return cls(x, y)

    @property
    def K(self) -> int:
        return len(self.x)

    def log_atom_probs(self) -> list[float]:
        """log P(X = x_k) for k = 1..K (the positive half only)."""
        y = self.y
        out = [-y[k - 1] + _log1mexp(y[k] - y[k - 1]) for k in range(1, self.K)]
        out.append(-y[self.K - 1])
        return out

    def atom_probs(self) -> list[float]:
        return [math.exp(lp) for lp in self.log_atom_probs()]

    def log_tail(self, t: float) -> float:
        k = bisect.bisect_right(self.x, t)
        if k >= self.K:
            return -math.inf
        return -self.y[k]


@dataclass(frozen=True)
class Distribution:
    """An immutable symmetric law.

    ``scale`` is sigma for Gaussian, the scale b for Laplace (density
    ``exp(-|x|/b) / 2b``) and the half-width a for Uniform; it is ignored by
    the parameter-free kinds.
    """

    kind: Kind
    scale: float = 1.0
    steps: StepTailSpec | None = field(default=None, compare=True)

    def __post_init__(self):
        if not isinstance(self.kind, Kind):
            object.__setattr__(self, "kind", Kind(self.kind))
        scale = float(self.scale)
        if self.kind in (Kind.GAUSSIAN, Kind.LAPLACE, Kind.UNIFORM):
            if not (scale > 0 and math.isfinite(scale)):
                raise InvalidParameter(f"{self.kind.value}: scale must be positive and finite, got {self.scale}")
        object.__setattr__(self, "scale", scale)
        if self.kind is Kind.STEPTAIL and self.steps is None:
            object.__setattr__(self, "steps", StepTailSpec.default())

    # -- identification -------------------------------------------------

    @property
    def spec(self) -> str:
        """Canonical spec string, parseable by :func:`parse_dist`."""
        if self.kind in (Kind.GAUSSIAN, Kind.LAPLACE, Kind.UNIFORM):
            return f"{self.kind.value}:{self.scale!r}"
        if self.kind is Kind.STEPTAIL:
            if self.steps == StepTailSpec.default(self.steps.K):
                return f"steptail:{self.steps.K}"
            return "steptail:custom"
        return self.kind.value

    @property
    def is_atomic(self) -> bool:
        return self.kind in (Kind.RADEMACHER, Kind.STEPTAIL, Kind.ZERO)

    def atoms(self) -> tuple[float, ...]:
        """Positive atom locations, ascending (empty for atomless laws)."""
        if self.kind is Kind.RADEMACHER:
            return (1.0,)
        if self.kind is Kind.STEPTAIL:
            return self.steps.x
        return ()

    # -- tails ----------------------------------------------------------

    def log_tail(self, t: float) -> float:
        """log P(X > t) for t >= 0."""
        t = float(t)
        if t < 0:
            raise DomainError("tail is defined for t >= 0 (use symmetry)")
        k = self.kind
        if k is Kind.GAUSSIAN:
            return float(special.log_ndtr(-t / self.scale))
        if k is Kind.LAPLACE:
            return -LOG2 - t / self.scale
        if k is Kind.UNIFORM:
            a = self.scale
            return math.log((a - t) / (2 * a)) if t < a else -math.inf
        if k is Kind.RADEMACHER:
            return -LOG2 if t < 1.0 else -math.inf
        if k is Kind.STEPTAIL:
            return self.steps.log_tail(t)
        return -math.inf

    def tail(self, t: float) -> float:
        """P(X > t) for t >= 0."""
        if self.kind is Kind.GAUSSIAN:
            if t < 0:
                raise DomainError("tail is defined for t >= 0 (use symmetry)")
            return 0.5 * math.erfc(t / (self.scale * math.sqrt(2.0)))
        lt = self.log_tail(t)
        return math.exp(lt) if lt > -math.inf else 0.0

    def log_atom_at_sup(self) -> float:
        """log P(X = ess sup X); -inf when the supremum is not an atom."""
        if self.kind is Kind.RADEMACHER:
            return -LOG2
        if self.kind is Kind.STEPTAIL:
            return -self.steps.y[self.steps.K - 1]
        if self.kind is Kind.ZERO:
            return 0.0
        return -math.inf

    # -- moments --------------------------------------------------------

    @property
    def ess_sup(self) -> float:
        k = self.kind
        if k in (Kind.GAUSSIAN, Kind.LAPLACE):
            return math.inf
        if k is Kind.UNIFORM:
            return self.scale
        if k is Kind.RADEMACHER:
            return 1.0
        if k is Kind.STEPTAIL:
            return self.steps.x[-1]
        return 0.0

    @property
    def mgf_radius(self) -> float:
        """Sup of |s| with Lambda(s) finite."""
        return 1.0 / self.scale if self.kind is Kind.LAPLACE else math.inf

    def log_mgf(self, s: float) -> float:
        """Lambda(s) = log E exp(sX); +inf outside the finiteness domain."""
        s = abs(float(s))
        if s == 0.0:
            return 0.0
        k = self.kind
        if k is Kind.GAUSSIAN:
            return 0.5 * (self.scale * s) ** 2
        if k is Kind.LAPLACE:
            bs = self.scale * s
            return -math.log1p(-bs * bs) if bs < 1.0 else math.inf
        if k is Kind.UNIFORM:
            x = self.scale * s
            if x < 0.1:
                x2 = x * x
                return x2 * (1 / 6 + x2 * (-1 / 180 + x2 * (1 / 2835 + x2 * (-1 / 37800 + x2 / 467775))))
            if x < 20.0:
                return math.log(math.sinh(x) / x)
            return x + math.log1p(-math.exp(-2.0 * x)) - math.log(2.0 * x)
        if k is Kind.RADEMACHER:
            return _log_cosh(s)
        if k is Kind.STEPTAIL:
            terms = [lp + s * xk + math.log1p(math.exp(-2.0 * s * xk))
                     for lp, xk in zip(self.steps.log_atom_probs(), self.steps.x)]
            m = max(terms)
            return m + math.log(math.fsum(math.exp(v - m) for v in terms))
        return 0.0

    # -- sampling -------------------------------------------------------

    def from_uniform(self, u) -> np.ndarray:
        """Inverse CDF applied elementwise to uniforms in (0, 1)."""
        u = np.asarray(u, dtype=np.float64)
        k = self.kind
        if k is Kind.GAUSSIAN:
            return self.scale * special.ndtri(u)
        if k is Kind.LAPLACE:
            b = self.scale
            with np.errstate(divide="ignore", invalid="ignore"):
                lo = b * np.log(2.0 * u)
                hi = -b * np.log(2.0 - 2.0 * u)
            return np.where(u < 0.5, lo, hi)
        if k is Kind.UNIFORM:
            return self.scale * (2.0 * u - 1.0)
        if k is Kind.RADEMACHER:
            return np.where(u < 0.5, -1.0, 1.0)
        if k is Kind.STEPTAIL:
            st = self.steps
            w = np.minimum(u, 1.0 - u)
            # smallest k >= 1 with y_k >= -log w; the last atom takes the rest
            idx = np.searchsorted(np.asarray(st.y[1:st.K]), -np.log(w), side="left")
            mag = np.asarray(st.x)[idx]
            return np.where(u < 0.5, -mag, mag)
        return np.zeros_like(u)

    def sample(self, rng: np.random.Generator, size=None):
        u = rng.random(size)
        # Generator.random is on [0, 1); 0 would map to -inf for unbounded kinds
        u = np.where(u == 0.0, 2.0 ** -54, u)
        x = self.from_uniform(u)
        return float(x) if size is None else x


def _log_cosh(s: float) -> float:
    s = abs(s)
    return s + math.log1p(math.exp(-2.0 * s)) - LOG2


def make_distribution(kind: str | Kind, param: float | None = None,
                      steps: StepTailSpec | None = None) -> Distribution:
    """Build a distribution from a kind and its single parameter.

    For ``steptail`` the parameter, if given, is the truncation K of the
    default sequences; pass ``steps`` for custom sequences.
    """
    kind = Kind(kind.lower()) if isinstance(kind, str) else kind
    if kind is Kind.STEPTAIL:
        if steps is None:
            K = 12 if param is None else int(param)
            if K != param and param is not None:
                raise InvalidParameter(f"steptail: K must be an integer, got {param}")
            steps = StepTailSpec.default(K)
        return Distribution(kind, steps=steps)
    if kind in (Kind.RADEMACHER, Kind.ZERO):
        if param is not None:
            raise InvalidParameter(f"{kind.value} takes no parameter")
        return Distribution(kind)
    return Distribution(kind, 1.0 if param is None else param)


def parse_dist(text: str) -> Distribution:
    """Parse ``gaussian[:sigma]``, ``laplace[:scale]``, ``uniform[:a]``,
    ``rademacher`` or ``steptail[:K]`` (case-insensitive)."""
    name, _, arg = text.strip().lower().partition(":")
    try:
        kind = Kind(name)
    except ValueError:
        raise InvalidParameter(f"unknown distribution {name!r}") from None
    param = None
    if arg:
        try:
            param = float(arg)
        except ValueError:
            raise InvalidParameter(f"bad parameter {arg!r} for {name}") from None
    return make_distribution(kind, param)


def sample(d: Distribution, stream: np.random.Generator, size=None):
    return d.sample(stream, size)


def tail(d: Distribution, t: float) -> float:
    return d.tail(t)


def log_mgf(d: Distribution, s: float) -> float:
    return d.log_mgf(s)


def ess_sup(d: Distribution) -> float:
    return d.ess_sup


def regularity_profile(d: Distribution, grid: Sequence[float], rate=None) -> list[tuple[float, float]]:
    """Pairs ``(t, -log P(X > t) / Lambda*(t))`` over ``grid``.

    Chernoff's bound makes every ratio at least 1; a law has regular upper
    tails when the ratio tends to 1.  Log-tails are used throughout, so the
    huge y-levels of the step-tail law stay finite.
    """
    from .ratefn import RateFunction

    r = rate if rate is not None else RateFunction(d)
    out = []
    for t in grid:
        t = float(t)
        if t <= 0:
            raise DomainError("regularity ratio undefined where the rate is 0 (t <= 0)")
        if t >= d.ess_sup:
            raise DomainError(f"grid point {t} outside (0, ess sup = {d.ess_sup})")
        rate_t = r.legendre(t)
        if rate_t <= 0:
            raise DomainError(f"rate function vanishes at t={t}")
        out.append((t, -d.log_tail(t) / rate_t))
    return out
