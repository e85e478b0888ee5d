"""Rate functions, slow-entropy profiles, KS-rate fits and boundedness verdicts."""
from __future__ import annotations

import csv
import io
import math
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np
from joblib import Parallel, delayed

from .covering import cover_estimate
from .errors import InvalidArgument, NumericalDegeneracy, UnsupportedOperation
from .folner import FolnerSequence
from .names import collect_name_sample
from .relative import collect_fibers, relative_from_batch
from .systems.core import System
from .systems.factors import FactorMap
from .systems.partitions import Partition

DEFAULT_EPSILONS = (0.4, 0.2, 0.1, 0.05)
DEFAULT_NS = tuple(2 ** k for k in range(3, 13))
PROFILE_COLUMNS = ("n", "F_size", "epsilon", "cov_lower", "cov_upper", "rate", "ratio_lower", "ratio_upper")


class RateFunction:
    """Increasing positive unbounded ``U: N -> (0, inf)``.

    Kinds: ``log`` (``log(n + 1)``), ``poly`` (``n**t``), ``exp`` (``exp(t n)``)
    and ``table`` (explicit values for n = 1, 2, ...).
    """

    def __init__(self, kind: str = "log", t: float | None = None, table: Sequence[float] | None = None):
        if kind not in ("log", "poly", "exp", "table"):
            raise InvalidArgument(f"unknown rate kind {kind!r}")
        if kind in ("poly", "exp") and (t is None or t <= 0):
            raise InvalidArgument(f"{kind} rate needs t > 0")
        self.kind = kind
        self.t = None if t is None else float(t)
        self.table = None
        if kind == "table":
            vals = np.asarray(table if table is not None else [], dtype=np.float64)
            if vals.size < 2 or np.any(vals <= 0) or np.any(np.diff(vals) <= 0):
                raise InvalidArgument("rate table must be positive and strictly increasing")
            self.table = vals

    @classmethod
    def from_config(cls, cfg: dict | str) -> "RateFunction":
        if isinstance(cfg, str):
            return cls(cfg)
        return cls(cfg.get("kind", "log"), cfg.get("t"), cfg.get("table"))

    def __call__(self, n):
        n = np.asarray(n, dtype=np.float64)
        if np.any(n < 1):
            raise InvalidArgument("rate functions are evaluated at n >= 1")
        if self.kind == "log":
            out = np.log(n + 1)
        elif self.kind == "poly":
            out = n ** self.t
        elif self.kind == "exp":
            out = np.exp(self.t * n)
        else:
            idx = n.astype(np.int64) - 1
            if np.any(idx >= self.table.size) or np.any(n != np.floor(n)):
                raise InvalidArgument(f"rate table defined only for n = 1..{self.table.size}")
            out = self.table[idx]
        return float(out) if out.ndim == 0 else out

    def log_value(self, n: int) -> float:
        """``log U(n)``, finite even where ``U(n)`` overflows."""
        if self.kind == "exp":
            return self.t * n
        return math.log(self(n))

    def describe(self) -> dict:
        out = {"kind": self.kind}
        if self.t is not None:
            out["t"] = self.t
        if self.table is not None:
            out["table"] = self.table.tolist()
        return out

    def __repr__(self):
        return f"RateFunction({', '.join(f'{k}={v!r}' for k, v in self.describe().items())})"


def eval_rate(U: RateFunction, n: int) -> float:
    return U(n)


@dataclass(frozen=True)
class ProfileRow:
    n: int
    F_size: int
    epsilon: float
    cov_lower: int
    cov_upper: int
    rate: float
    ratio_lower: float
    ratio_upper: float


def _ratio(cov: int, U: RateFunction, size: int, rate: float) -> float:
    if math.isfinite(rate):
        return cov / rate
    return math.exp(math.log(cov) - U.log_value(size))


def make_row(n: int, size: int, epsilon: float, lower: int, upper: int, U: RateFunction) -> ProfileRow:
    with np.errstate(over="ignore"):
        rate = U(size)
    return ProfileRow(n, size, epsilon, lower, upper, rate, _ratio(lower, U, size, rate), _ratio(upper, U, size, rate))


@dataclass
class Profile:
    rows: list
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        keys = [(r.n, r.epsilon) for r in self.rows]
        if len(set(keys)) != len(keys):
            raise InvalidArgument("profile rows must be unique per (n, epsilon)")
        self.rows = sorted(self.rows, key=lambda r: (r.n, -r.epsilon))

    @property
    def epsilons(self) -> list[float]:
        return sorted({r.epsilon for r in self.rows}, reverse=True)

    @property
    def ns(self) -> list[int]:
        return sorted({r.n for r in self.rows})

    def series(self, epsilon: float, column: str) -> np.ndarray:
        return np.array([getattr(r, column) for r in self.rows if r.epsilon == epsilon])

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(PROFILE_COLUMNS)
        for r in self.rows:
            d = asdict(r)
            writer.writerow([format(d[c], ".9g") if isinstance(d[c], float) else d[c] for c in PROFILE_COLUMNS])
        return buf.getvalue()


def _profile_at(target, partition, F, epsilons, mode, sampling, n_samples, seed, base, base_budget, fiber_budget):
    out, notes = [], {}
    if isinstance(target, FactorMap):
        batch = collect_fibers(target, partition, F, base, base_budget, fiber_budget, seed)
        for eps in epsilons:
            est = relative_from_batch(batch, eps, mode)
            out.append((eps, est.value_lower, est.value_upper))
        notes["fibers"] = len(batch)
        return out, notes
    sample = None
    if sampling in ("exact", "auto"):
        try:
            sample = collect_name_sample(target, partition, F, "exact")
        except UnsupportedOperation:
            if sampling == "exact":
                raise
    if sample is None:
        sample = collect_name_sample(target, partition, F, "monte_carlo", n_samples, seed)
    notes["sampling"] = sample.provenance.get("mode")
    for eps in epsilons:
        est = cover_estimate(sample, eps, mode)
        low = est.exact if est.exact is not None else est.lower
        out.append((eps, low, est.value))
    return out, notes


def slow_entropy_profile(target: System | FactorMap, partition: Partition, folner: FolnerSequence,
                         epsilons: Sequence[float] = DEFAULT_EPSILONS, ns: Sequence[int] = DEFAULT_NS,
                         U: RateFunction | None = None, mode: str = "auto", sampling: str = "auto",
                         n_samples: int = 4096, seed=0, base: str = "monte_carlo", base_budget: int = 256,
                         fiber_budget: int = 512, n_jobs: int = 1) -> Profile:
    """Covering brackets and rate ratios for every ``(n, epsilon)`` in the grids.

    A ``System`` target gives absolute covering numbers; a ``FactorMap`` gives
    relative ones over its target.
    """
    U = U or RateFunction("log")
    epsilons, ns = list(epsilons), list(ns)
    if not epsilons or not ns:
        raise InvalidArgument("epsilon and n grids must be nonempty")
    if any(not 0 < e < 1 for e in epsilons):
        raise InvalidArgument("every epsilon must lie in (0, 1)")
    windows = [folner(n) for n in ns]
    jobs = (delayed(_profile_at)(target, partition, F, epsilons, mode, sampling, n_samples, seed, base,
                                 base_budget, fiber_budget) for F in windows)
    results = Parallel(n_jobs=n_jobs, prefer="threads")(jobs) if n_jobs != 1 else [
        _profile_at(target, partition, F, epsilons, mode, sampling, n_samples, seed, base, base_budget,
                    fiber_budget) for F in windows]
    rows, notes = [], {}
    for n, F, (vals, note) in zip(ns, windows, results):
        notes[n] = note
        rows.extend(make_row(n, len(F), eps, lo, up, U) for eps, lo, up in vals)
    meta = {"epsilon_grid": epsilons, "n_grid": ns, "folner": folner.describe(), "rate": U.describe(),
            "mode": mode, "seed": seed, "per_n": notes,
            "limits": "sup over epsilon and limsup over n are reported as maxima over the finite grids"}
    return Profile(rows, meta)


@dataclass
class KSEstimate:
    lower: float
    upper: float
    slopes_lower: dict
    slopes_upper: dict

    @property
    def interval(self) -> tuple[float, float]:
        return min(self.lower, self.upper), max(self.lower, self.upper)

    def contains(self, value: float, tol: float = 0.0) -> bool:
        lo, hi = self.interval
        return lo - tol <= value <= hi + tol


def ks_from_profile(profile: Profile) -> KSEstimate:
    """Max over epsilon of the least-squares slope of log cov against |F_n|."""
    slopes = {"cov_lower": {}, "cov_upper": {}}
    for eps in profile.epsilons:
        sizes = profile.series(eps, "F_size").astype(np.float64)
        if np.unique(sizes).size < 3:
            raise NumericalDegeneracy("slope fit needs at least three distinct window sizes")
        for col in slopes:
            slopes[col][eps] = float(np.polyfit(sizes, np.log(profile.series(eps, col)), 1)[0])
    return KSEstimate(max(slopes["cov_lower"].values()), max(slopes["cov_upper"].values()),
                      slopes["cov_lower"], slopes["cov_upper"])


def ks_estimate(target: System | FactorMap, partition: Partition, folner: FolnerSequence,
                epsilons: Sequence[float] = DEFAULT_EPSILONS, ns: Sequence[int] = (8, 10, 12, 14, 16),
                **kwargs) -> KSEstimate:
    if len(set(ns)) < 3:
        raise NumericalDegeneracy("the n grid needs at least three points")
    return ks_from_profile(slow_entropy_profile(target, partition, folner, epsilons, ns, **kwargs))


def boundedness_verdict(profile: Profile, window: int = 3) -> str:
    """``bounded``, ``growing`` or ``inconclusive`` from the trailing ``window`` n values."""
    ns = profile.ns[-window:]
    if len(ns) < window:
        return "inconclusive"
    tail = [r for r in profile.rows if r.n in ns]
    flat, grew = True, False
    for eps in profile.epsilons:
        rows = sorted((r for r in tail if r.epsilon == eps), key=lambda r: r.n)
        if len({r.cov_upper for r in rows}) != 1:
            flat = False
        if rows[-1].cov_lower - rows[0].cov_lower >= 2:
            grew = True
    if flat:
        return "bounded"
    return "growing" if grew else "inconclusive"
