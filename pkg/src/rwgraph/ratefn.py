"""Legendre transform of the log-MGF and the quantities built on it.

The rate function is ``Lambda*(t) = sup_s {s t - Lambda(s)}``.  For a
symmetric law the supremum for ``t >= 0`` is attained at ``s >= 0``, and the
objective is concave in ``s``; the generic engine brackets the maximiser by
doubling and then runs a ternary search.  Infinite values are plain IEEE
``inf`` and propagate through every operation.
"""
from __future__ import annotations

import math
import threading

from .dist import Distribution, Kind
from .errors import DegenerateProbability, DomainError

__all__ = [
    "RateFunction",
    "legendre",
    "rate_inverse",
    "chernoff_bound",
    "sum_bound",
    "threshold_xn",
]

_TERNARY_ITERS = 200
_BISECT_ITERS = 200
_RADIUS_MARGIN = 1e-12


class RateFunction:
    """Rate function of ``source`` with evaluation and generalised inverse.

    Parameters
    ----------
    source : Distribution
    tol : float
        Relative bracket width at which the ternary search stops.
    closed_form : bool
        Use exact formulas where the kind has one (Gaussian, Laplace,
        Rademacher, the point mass).  ``False`` forces the numeric engine.
    memoize : bool
        Cache evaluations.  The cache is lock-guarded, so a shared instance
        behaves exactly like the uncached function.
    """

    def __init__(self, source: Distribution, tol: float = 1e-10,
                 closed_form: bool = True, memoize: bool = True):
        self.source = source
        self.tol = tol
        self.closed_form = closed_form
        self.domain_cap = source.ess_sup
        self._memo: dict[float, float] | None = {} if memoize else None
        self._lock = threading.Lock()

    def __repr__(self):
        return f"RateFunction({self.source.spec}, closed_form={self.closed_form})"

    def __getstate__(self):
        state = self.__dict__.copy()
        del state["_lock"]
        return state

    def __setstate__(self, state):
        self.__dict__.update(state)
        self._lock = threading.Lock()

    # -- evaluation -----------------------------------------------------

    def legendre(self, t: float) -> float:
        t = abs(float(t))
        if self._memo is None:
            return self._evaluate(t)
        with self._lock:
            hit = self._memo.get(t)
        if hit is not None:
            return hit
        value = self._evaluate(t)
        with self._lock:
            self._memo[t] = value
        return value

    __call__ = legendre

    def _evaluate(self, t: float) -> float:
        if t == 0.0:
            return 0.0
        cap = self.domain_cap
        if t > cap:
            return math.inf
        if t == cap:
            # sup not attained; the objective increases to -log P(X = cap)
            return -self.source.log_atom_at_sup()
        if self.closed_form:
            exact = _closed_form(self.source, t)
            if exact is not None:
                return exact
        return self.conjugate(t)

    def conjugate(self, t: float) -> float:
        """Numeric ``sup_{s >= 0} {s t - Lambda(s)}`` (no closed forms, no cache)."""
        lam = self.source.log_mgf
        radius = self.source.mgf_radius
        limit = radius * (1.0 - _RADIUS_MARGIN) if math.isfinite(radius) else math.inf

        def f(s):
            return s * t - lam(s)

        s = min(1.0, 0.5 * limit)
        while 2.0 * s < limit and f(2.0 * s) > f(s):
            s *= 2.0
            if s > 1e300:
                break
        lo, hi = 0.0, min(2.0 * s, limit)
        for _ in range(_TERNARY_ITERS):
            if hi - lo <= self.tol * 1e-5 * max(1.0, hi):
                break
            m1 = lo + (hi - lo) / 3.0
            m2 = hi - (hi - lo) / 3.0
            if f(m1) < f(m2):
                lo = m1
            else:
                hi = m2
        return max(f(lo), f(hi), f(0.5 * (lo + hi)), 0.0)

    def inverse(self, y: float) -> float:
        """Generalised inverse ``inf{s >= 0 : Lambda*(s) >= y}``."""
        y = float(y)
        if y < 0:
            raise DomainError("rate_inverse needs y >= 0")
        cap = self.domain_cap
        if y == 0.0 or cap == 0.0:
            return 0.0
        hi = min(1.0, cap)
        while self.legendre(hi) < y and hi < cap:
            hi = min(2.0 * hi, cap)
        if self.legendre(hi) < y:
            # only at a finite cap: Lambda* jumps to +inf right after it
            return cap
        lo = 0.0
        for _ in range(_BISECT_ITERS):
            mid = 0.5 * (lo + hi)
            if mid <= lo or mid >= hi:
                break
            if self.legendre(mid) >= y:
                hi = mid
            else:
                lo = mid
        return min(hi, cap)

    def chernoff(self, t: float) -> float:
        """Upper bound ``exp(-Lambda*(t))`` on P(X > t)."""
        return math.exp(-self.legendre(t))

    def sum_bound(self, k: int, t: float) -> float:
        """Upper bound ``exp(-k Lambda*(t))`` on P(X_1 + ... + X_k > k t)."""
        if k < 1:
            raise DomainError("k must be a positive integer")
        return math.exp(-k * self.legendre(t))


def _closed_form(d: Distribution, t: float) -> float | None:
    k = d.kind
    if k is Kind.GAUSSIAN:
        return 0.5 * (t / d.scale) ** 2
    if k is Kind.LAPLACE:
        u = t / d.scale
        r = math.hypot(1.0, u)
        # r - 1 - log((1 + r)/2), written to avoid cancellation for small u
        return u * u / (r + 1.0) - math.log1p(u * u / ((r + 1.0) * 2.0))
    if k is Kind.RADEMACHER:
        return 0.5 * ((1 + t) * math.log1p(t) + (1 - t) * math.log1p(-t))
    return None


def legendre(r: RateFunction, t: float) -> float:
    return r.legendre(t)


def rate_inverse(r: RateFunction, y: float) -> float:
    return r.inverse(y)


def chernoff_bound(r: RateFunction, t: float) -> float:
    if t <= 0:
        raise DomainError("chernoff_bound needs t > 0")
    return r.chernoff(t)


def sum_bound(r: RateFunction, k: int, t: float) -> float:
    if t <= 0:
        raise DomainError("sum_bound needs t > 0")
    return r.sum_bound(k, t)


def threshold_xn(d: Distribution, alpha: float, omega: float, n: int,
                 rate: RateFunction | None = None, check: bool = True) -> float:
    """``inf{t > 0 : P(X > t) <= omega * n**-alpha}``.

    Continuous laws are bisected on the log-tail; for atomic laws the
    infimum sits on an atom and is returned exactly.  With ``check`` the
    upper half of the sandwich ``x_n <= Lambda*^{-1}(alpha log n)`` is
    verified before returning.
    """
    if alpha <= 0:
        raise DomainError("alpha must be positive")
    if omega < 1:
        raise DomainError("omega must be >= 1")
    if n < 2:
        raise DomainError("n must be >= 2")
    log_p = math.log(omega) - alpha * math.log(n)
    if log_p >= -math.log(2.0):
        raise DegenerateProbability(
            f"omega * n^-alpha = {math.exp(log_p):.4g} >= 1/2: threshold would be 0")
    if d.kind is Kind.ZERO:
        return 0.0
    if d.is_atomic:
        x = next(a for a in d.atoms() if d.log_tail(a) <= log_p)
    else:
        hi = 1.0
        while d.log_tail(hi) > log_p:
            hi *= 2.0
        lo = 0.0
        for _ in range(_BISECT_ITERS):
            mid = 0.5 * (lo + hi)
            if mid <= lo or mid >= hi:
                break
            if d.log_tail(mid) <= log_p:
                hi = mid
            else:
                lo = mid
        x = hi
    if check:
        r = rate if rate is not None else RateFunction(d)
        bound = r.inverse(alpha * math.log(n))
        if x > bound * (1 + 1e-9) + 1e-12:
            raise ArithmeticError(f"threshold {x} exceeds rate inverse {bound}")
    return x
