"""Seeded Monte Carlo harness.

Instances come from a counter-based generator: edge ``e`` of trial ``t``
under seed ``s`` is the inverse-CDF image of the uniform derived from
Philox-4x64 block ``e // 4``, word ``e % 4``, with key ``(s, t)``.  Any edge
can be regenerated on its own, and trials can run in any order or process
without changing a single bit of the report.
"""
from __future__ import annotations

import csv
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .dist import Distribution, Kind, parse_dist
from .errors import DomainError, InvalidParameter
from .pruning import certify_lower_bound, default_delta
from .ratefn import RateFunction
from .solvers import WeightedInstance, check_solvable, solve
from .structures import (FamilyKind, StructureFamily, expectation_bound, finite_n_upper,
                         parse_pattern, predict)

__all__ = [
    "GENERATOR",
    "uniforms",
    "edge_weight",
    "gen_instance",
    "ExperimentReport",
    "run_trials",
    "ratio_table",
    "TableRow",
    "concentration_check",
    "write_report",
    "read_report",
    "read_rows",
    "make_family",
]

GENERATOR = "philox4x64-10; key=(seed, trial); edge e -> block e//4, word e%4; u=((x>>11)+0.5)*2^-53; inverse CDF"
_MASK64 = (1 << 64) - 1
CSV_HEADER = ["trial", "weight", "ratio", "found_certificate", "certified_bound"]


def _key(seed: int, trial: int) -> np.ndarray:
    return np.array([seed & _MASK64, trial & _MASK64], dtype=np.uint64)


def _to_unit(raw: np.ndarray) -> np.ndarray:
    return ((raw >> np.uint64(11)).astype(np.float64) + 0.5) * 2.0 ** -53


def uniforms(seed: int, trial: int, count: int) -> np.ndarray:
    """The first ``count`` uniforms of stream (seed, trial), all in (0, 1)."""
    bitgen = np.random.Philox(key=_key(seed, trial))
    return _to_unit(bitgen.random_raw(count))


def edge_weight(d: Distribution, seed: int, trial: int, edge: int) -> float:
    """Weight of one edge, computed without generating the others."""
    block, word = divmod(edge, 4)
    bitgen = np.random.Philox(key=_key(seed, trial), counter=np.array([block, 0, 0, 0], dtype=np.uint64))
    return float(d.from_uniform(_to_unit(bitgen.random_raw(4))[word]))


def gen_instance(f: StructureFamily, d: Distribution, seed: int, trial: int) -> WeightedInstance:
    n = f.n
    prov = {"dist": d.spec, "seed": seed, "trial": trial}
    if f.bipartite:
        w = d.from_uniform(uniforms(seed, trial, n * n)).reshape(n, n)
        return WeightedInstance("bipartite", n, w, prov)
    w = d.from_uniform(uniforms(seed, trial, n * (n - 1) // 2))
    return WeightedInstance("complete", n, w, prov)


def make_family(name: str, n: int, pattern: str | None = None) -> StructureFamily:
    """Family from its CLI name: matching, tree, hamcycle, path, copy."""
    try:
        kind = FamilyKind(name.lower())
    except ValueError:
        raise InvalidParameter(f"unknown family {name!r}") from None
    if kind is FamilyKind.COPY:
        if pattern is None:
            raise InvalidParameter("family 'copy' needs --pattern")
        return StructureFamily(kind, n, parse_pattern(pattern))
    if pattern is not None:
        raise InvalidParameter(f"family {name!r} takes no pattern")
    return StructureFamily(kind, n)


# -- reports -------------------------------------------------------------

def _stats(xs: list[float]) -> tuple[float, float]:
    """Mean and unbiased variance, both from correctly rounded sums."""
    N = len(xs)
    mean = math.fsum(xs) / N
    var = math.fsum((x - mean) ** 2 for x in xs) / (N - 1) if N > 1 else 0.0
    return mean, var


@dataclass
class ExperimentReport:
    family: str
    dist: str
    n: int
    trials: int
    seed: int
    weights: list[float]
    found: list[bool | None]
    certified: list[float | None]
    prediction: float
    ewn_bound: float
    finite_n_upper: float
    pattern: str | None = None
    generator: str = GENERATOR
    mean: float = field(init=False)
    variance: float = field(init=False)
    min: float = field(init=False)
    max: float = field(init=False)
    ratio_mean: float | None = field(init=False)
    ratio_stderr: float | None = field(init=False)
    violations: dict = field(init=False)

    def __post_init__(self):
        if len(self.weights) != self.trials:
            raise InvalidParameter("one weight per trial required")
        self.mean, self.variance = _stats(self.weights)
        self.min = min(self.weights)
        self.max = max(self.weights)
        ratios = self.ratios()
        if ratios is None:
            self.ratio_mean = self.ratio_stderr = None
        else:
            rm, rv = _stats(ratios)
            self.ratio_mean, self.ratio_stderr = rm, math.sqrt(rv / self.trials)
        stderr = math.sqrt(self.variance / self.trials)
        self.violations = {
            "finite_n_upper": sum(1 for w in self.weights if w > self.finite_n_upper),
            "ewn": int(self.mean > self.ewn_bound + 3.0 * stderr),
        }

    def ratios(self) -> list[float] | None:
        if self.prediction == 0:
            return None
        return [w / self.prediction for w in self.weights]

    @property
    def stderr(self) -> float:
        return math.sqrt(self.variance / self.trials)

    @property
    def ok(self) -> bool:
        return not any(self.violations.values())

    def summary(self) -> dict:
        keys = ["family", "dist", "n", "trials", "seed", "mean", "variance", "min", "max",
                "prediction", "ewn_bound", "ratio_mean", "ratio_stderr", "violations"]
        out = {k: getattr(self, k) for k in keys}
        if self.pattern is not None:
            out["pattern"] = self.pattern
        return out

    def notes(self) -> list[str]:
        out = ["ratio_mean is an empirical calibration; no finite-n convergence rate is proven"]
        if self.family == FamilyKind.TREE.value:
            out.append("prediction uses n * rate_inverse(log n) although trees have n - 1 edges")
        return out

    def to_json(self) -> dict:
        out = self.summary()
        out["finite_n_upper_bound"] = self.finite_n_upper
        out["generator"] = self.generator
        out["notes"] = self.notes()
        out["rows"] = [{"trial": i, "weight": w, "found_certificate": f, "certified_bound": c}
                       for i, (w, f, c) in enumerate(zip(self.weights, self.found, self.certified))]
        return out

    @classmethod
    def from_json(cls, data: dict) -> "ExperimentReport":
        rows = sorted(data["rows"], key=lambda r: r["trial"])
        rep = cls(
            family=data["family"], dist=data["dist"], n=data["n"], trials=data["trials"],
            seed=data["seed"], weights=[r["weight"] for r in rows],
            found=[r["found_certificate"] for r in rows],
            certified=[r["certified_bound"] for r in rows],
            prediction=data["prediction"], ewn_bound=data["ewn_bound"],
            finite_n_upper=data["finite_n_upper_bound"], pattern=data.get("pattern"),
            generator=data.get("generator", GENERATOR),
        )
        stored = {k: data[k] for k in rep.summary()}
        if stored != rep.summary():
            raise ValueError("report summary does not match its rows")
        return rep


# -- trials --------------------------------------------------------------

def _run_one(args):
    f, d, seed, trial, delta = args
    inst = gen_instance(f, d, seed, trial)
    weight = solve(f, inst).weight
    if delta is None:
        return weight, None, None
    cert = certify_lower_bound(f, inst, delta, d)
    return weight, cert.found, cert.certified_bound


def _map(tasks, workers):
    if workers <= 1:
        return [_run_one(t) for t in tasks]
    chunk = max(1, len(tasks) // (4 * workers))
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_run_one, tasks, chunksize=chunk))


def run_trials(f: StructureFamily, d: Distribution, trials: int, seed: int,
               workers: int = 1, certify: bool = False, delta: float | None = None,
               rate: RateFunction | None = None) -> ExperimentReport:
    """Solve ``trials`` seeded instances exactly and summarise them.

    With ``certify`` each instance also gets a pruning certificate at
    ``delta`` (default 1/log n).  Results are gathered in trial order, so
    the report does not depend on ``workers``.
    """
    if trials < 1:
        raise InvalidParameter("need at least one trial")
    check_solvable(f)
    r = rate if rate is not None else RateFunction(d)
    if certify and delta is None:
        delta = default_delta(f.n)
    tasks = [(f, d, seed, t, delta if certify else None) for t in range(trials)]
    results = _map(tasks, workers)
    return ExperimentReport(
        family=f.kind.value, dist=d.spec, n=f.n, trials=trials, seed=seed,
        weights=[float(w) for w, _, _ in results],
        found=[c for _, c, _ in results],
        certified=[b for _, _, b in results],
        prediction=predict(f, r), ewn_bound=expectation_bound(f, r),
        finite_n_upper=finite_n_upper(f, r),
        pattern=f.pattern.to_text() if f.pattern is not None else None,
    )


@dataclass(frozen=True)
class TableRow:
    n: int
    mean: float
    prediction: float
    ratio_mean: float | None
    stderr: float
    ewn_bound: float
    max: float
    finite_n_upper: float


def ratio_table(family: str, d: Distribution, n_list, trials: int, seed: int,
                pattern: str | None = None, workers: int = 1) -> list[TableRow]:
    fams = [make_family(family, n, pattern) for n in n_list]
    for f in fams:
        check_solvable(f)
    r = RateFunction(d)
    rows = []
    for f in fams:
        rep = run_trials(f, d, trials, seed, workers=workers, rate=r)
        rows.append(TableRow(f.n, rep.mean, rep.prediction, rep.ratio_mean, rep.stderr,
                             rep.ewn_bound, rep.max, rep.finite_n_upper))
    return rows


@dataclass(frozen=True)
class ConcentrationRow:
    t: float
    frequency: float
    bound: float
    stderr: float
    flagged: bool


def concentration_check(report: ExperimentReport, l: int,
                        multiples=(1.0, 2.0, 3.0)) -> list[ConcentrationRow]:
    """Empirical ``P(|W - mean| >= t)`` against ``2 exp(-t^2 / (2 l sigma^2))``.

    A row is flagged when the frequency exceeds the bound by more than three
    binomial standard errors.
    """
    d = parse_dist(report.dist)
    if d.kind is not Kind.GAUSSIAN:
        raise DomainError("concentration bound applies to Gaussian weights only")
    var_scale = l * d.scale ** 2
    N = report.trials
    rows = []
    for m in multiples:
        t = m * math.sqrt(l) * d.scale
        freq = sum(1 for w in report.weights if abs(w - report.mean) >= t) / N
        bound = 2.0 * math.exp(-t * t / (2.0 * var_scale))
        p = min(bound, 1.0)
        se = math.sqrt(p * (1.0 - p) / N)
        rows.append(ConcentrationRow(t, freq, bound, se, freq > bound + 3.0 * se))
    return rows


# -- I/O -------------------------------------------------------------------

def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, bool):
        return str(int(x))
    return format(x, ".17g")


def write_report(report: ExperimentReport, path, fmt: str | None = None) -> None:
    """Write per-trial rows as CSV or the full report as JSON."""
    path = Path(path)
    fmt = fmt or ("json" if path.suffix.lower() == ".json" else "csv")
    try:
        if fmt == "csv":
            ratios = report.ratios() or [None] * report.trials
            with open(path, "w", newline="") as fh:
                out = csv.writer(fh, lineterminator="\n")
                out.writerow(CSV_HEADER)
                for i in range(report.trials):
                    out.writerow([i, _fmt(report.weights[i]), _fmt(ratios[i]),
                                  _fmt(report.found[i]), _fmt(report.certified[i])])
        elif fmt == "json":
            path.write_text(json.dumps(report.to_json(), indent=1) + "\n")
        else:
            raise InvalidParameter(f"unknown report format {fmt!r}")
    except OSError as exc:
        raise OSError(f"cannot write report to {path}: {exc}") from exc


def read_report(path) -> ExperimentReport:
    return ExperimentReport.from_json(json.loads(Path(path).read_text()))


def read_rows(path) -> list[dict]:
    """Parse a CSV report back into typed rows."""
    def num(s):
        return None if s == "" else float(s)

    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    return [{"trial": int(r["trial"]), "weight": float(r["weight"]), "ratio": num(r["ratio"]),
             "found_certificate": None if r["found_certificate"] == "" else r["found_certificate"] == "1",
             "certified_bound": num(r["certified_bound"])} for r in rows]
