"""Indicators estimated from a journal's moments alone.

All functions here take log-normal parameters (or records carrying them) and
never look at per-paper data. See :mod:`citecore.empirical` for the
raw-data counterparts.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy import optimize

from citecore.errors import DegenerateComparisonError, DomainError, InvariantError
from citecore.lognormal import (
    ArithMoments,
    LogMoments,
    _group_params,
    arith_to_log,
    group_moments,
    lognormal_ccdf,
    std_normal_cdf,
)

ROOT_XTOL = 1e-6
ROOT_MAXITER = 200
DEFAULT_THRESHOLD = 0.9
DEFAULT_KAPPA_CAP = 10**6

# kappa status codes
OK = "ok"
LIMIT_UNREACHABLE = "limit-unreachable"
CAP_EXCEEDED = "cap-exceeded"


@dataclass(frozen=True)
class JournalRecord:
    """One journal: identity, paper count and moments of c + 1.

    ``log`` holds directly measured log moments when they are known;
    ``log_source`` records whether it was measured or derived from ``arith``.
    """

    id: str
    name: str
    n_papers: int
    arith: ArithMoments
    log: Optional[LogMoments] = None
    log_source: Optional[str] = None

    def __post_init__(self):
        if isinstance(self.n_papers, bool) or int(self.n_papers) != self.n_papers:
            raise InvariantError(f"{self.id}: n_papers must be an integer")
        if self.n_papers < 1:
            raise InvariantError(f"{self.id}: n_papers must be >= 1, got {self.n_papers}")
        if self.log is not None and self.log_source is None:
            object.__setattr__(self, "log_source", "measured")

    @property
    def lognormal(self) -> LogMoments:
        """Log moments used for estimation: supplied ones first, else derived."""
        if self.log is not None:
            return self.log
        return arith_to_log(self.arith)

    @property
    def derived(self) -> LogMoments:
        return arith_to_log(self.arith)

    def with_derived_log(self) -> "JournalRecord":
        """Copy of this record whose log moments come from ``arith`` only."""
        return JournalRecord(self.id, self.name, self.n_papers, self.arith, self.derived, "derived")


@dataclass(frozen=True)
class KappaResult:
    kappa_t: Optional[int]
    kappa_r: Optional[int]
    success_at_kappa: Optional[float]
    threshold: float
    reachable: bool
    status: str = OK
    kappa_real: Optional[float] = None


@dataclass
class RankTable:
    """Average percentile rank per journal id (0 worst, 1 best)."""

    values: dict
    weights: dict = field(default_factory=dict)

    def __getitem__(self, key):
        return self.values[key]

    def __len__(self):
        return len(self.values)

    def weighted_mean(self) -> float:
        total = math.fsum(self.weights[k] for k in self.values)
        return math.fsum(self.weights[k] * r for k, r in self.values.items()) / total

    def ranked(self) -> list:
        """(id, R) pairs, best first; ties broken by id."""
        return sorted(self.values.items(), key=lambda kv: (-kv[1], _id_key(kv[0])))


def _id_key(jid: str):
    return (0, int(jid), "") if jid.isdigit() else (1, 0, jid)


def impact_factor(j: JournalRecord) -> float:
    """Journal Impact Factor, which is just the mean ``m``."""
    return j.arith.m


def estimate_h_index(j: JournalRecord, lm: Optional[LogMoments] = None) -> tuple[float, int]:
    """Real-valued and integer h-index implied by the moments of ``j``.

    Solves h = N * P(c + 1 > h + 1) by bisection on [0, N]. The right-hand
    side decreases in h, so the root is unique. The integer form is the
    floor of the real root.
    """
    lm = j.lognormal if lm is None else lm
    n = float(j.n_papers)
    if lm.sigma_ln == 0:
        h = min(n, max(0.0, math.exp(lm.mu_ln) - 1.0))
        return h, int(math.floor(h))

    def gap(h):
        return h - n * lognormal_ccdf(h + 1.0, lm)

    if gap(0.0) >= 0:
        return 0.0, 0
    h = optimize.bisect(gap, 0.0, n, xtol=1e-12, maxiter=ROOT_MAXITER)
    return h, int(math.floor(h))


def _csi_arrays(mu_t, s_t, mu_r, s_r):
    mu_t, s_t, mu_r, s_r = np.broadcast_arrays(
        *(np.asarray(a, dtype=float) for a in (mu_t, s_t, mu_r, s_r))
    )
    scale = np.hypot(s_t, s_r)
    diff = mu_t - mu_r
    point = scale == 0
    if np.any(point & (diff == 0)):
        raise DegenerateComparisonError("two identical point masses cannot be compared")
    with np.errstate(divide="ignore", invalid="ignore"):
        z = np.where(point, np.sign(diff) * np.inf, diff / np.where(point, 1.0, scale))
    return std_normal_cdf(z)


def csi(t: LogMoments, r: LogMoments) -> float:
    """Probability that a random paper of ``t`` out-cites one of ``r``."""
    return float(_csi_arrays(t.mu_ln, t.sigma_ln, r.mu_ln, r.sigma_ln))


def group_csi(t: LogMoments, k_t: int, r: LogMoments, k_r: int) -> float:
    """Probability that the mean of ``k_t`` papers of ``t`` beats the mean of ``k_r`` of ``r``."""
    gt = group_moments(t, k_t)
    gr = group_moments(r, k_r)
    return csi(gt.as_log(), gr.as_log())


def _coupling_ratio(v_t: float, v_r: float) -> float:
    if v_t == 0:
        if v_r == 0:
            return 1.0
        raise DomainError("size coupling k_r/k_t = v_r/v_t is undefined for v_t = 0")
    return v_r / v_t


def coupled_kr(k_t, ratio: float):
    """k_r = max(1, round(k_t * ratio)), halves rounded up."""
    k = np.maximum(1, np.floor(np.asarray(k_t, dtype=float) * ratio + 0.5)).astype(np.int64)
    return int(k) if k.ndim == 0 else k


def _coupled_success(lt: LogMoments, lr: LogMoments, k_t, ratio: float, integer: bool = True):
    k_t = np.asarray(k_t, dtype=float)
    k_r = coupled_kr(k_t, ratio) if integer else np.maximum(1.0, k_t * ratio)
    mt, st = _group_params(lt.mu_ln, lt.sigma_ln, k_t)
    mr, sr = _group_params(lr.mu_ln, lr.sigma_ln, k_r)
    # k = 1 must reproduce the one-to-one value exactly
    mt = np.where(k_t == 1, lt.mu_ln, mt)
    st = np.where(k_t == 1, lt.sigma_ln, st)
    mr = np.where(np.asarray(k_r) == 1, lr.mu_ln, mr)
    sr = np.where(np.asarray(k_r) == 1, lr.sigma_ln, sr)
    return _csi_arrays(mt, st, mr, sr)


def _first_passing(lt, lr, ratio, threshold, start: int, stop: int, chunk: int = 1 << 16):
    """Smallest integer k_t in [start, stop] whose coupled success reaches threshold."""
    lo = start
    while lo <= stop:
        hi = min(stop, lo + chunk - 1)
        ks = np.arange(lo, hi + 1, dtype=np.int64)
        ok = np.nonzero(np.asarray(_coupled_success(lt, lr, ks, ratio)) >= threshold)[0]
        if ok.size:
            return int(ks[ok[0]])
        lo = hi + 1
    return None


def min_representative_size(
    t: JournalRecord,
    r: JournalRecord,
    threshold: float = DEFAULT_THRESHOLD,
    cap: int = DEFAULT_KAPPA_CAP,
) -> KappaResult:
    """Minimum representative sizes (kappa_t, kappa_r) for comparing ``t`` with ``r``.

    Group sizes are coupled by k_r = max(1, round(k_t * v_r / v_t)). The
    result is the smallest integer k_t (and its coupled k_r) at which the
    group-group success probability reaches ``threshold``. A real-valued
    crossing is located by doubling and bisection first; the integers up to
    just past it are then scanned so the answer is the first passing
    integer, not merely one near the crossing.

    Unreachable results carry ``status`` ``"limit-unreachable"`` when ``t``
    does not have the larger implied mean (the large-k limit is <= 0.5) and
    ``"cap-exceeded"`` when the crossing lies beyond ``cap``.
    """
    if not 0.5 < threshold < 1:
        raise DomainError(f"threshold must lie in (0.5, 1), got {threshold}")
    if cap < 1:
        raise DomainError(f"cap must be >= 1, got {cap}")
    lt, lr = t.lognormal, r.lognormal
    ratio = _coupling_ratio(t.arith.v, r.arith.v)

    if not lt.implied_mean > lr.implied_mean:
        return KappaResult(None, None, None, threshold, False, LIMIT_UNREACHABLE)

    def gap(k):
        return float(_coupled_success(lt, lr, k, ratio, integer=False)) - threshold

    k_real = None
    if gap(1.0) >= 0:
        k_real = 1.0
    else:
        lo, hi = 1.0, 2.0
        while gap(hi) < 0:
            if hi > cap:
                break
            lo, hi = hi, 2.0 * hi
        if gap(hi) >= 0:
            k_real = optimize.bisect(gap, lo, hi, xtol=ROOT_XTOL, maxiter=ROOT_MAXITER)

    stop = cap if k_real is None else min(cap, int(math.ceil(k_real)) + 1)
    kt = _first_passing(lt, lr, ratio, threshold, 1, stop)
    if kt is None and stop < cap:
        kt = _first_passing(lt, lr, ratio, threshold, stop + 1, cap)
    if kt is None or coupled_kr(kt, ratio) > cap:
        return KappaResult(None, None, None, threshold, False, CAP_EXCEEDED, k_real)
    kr = coupled_kr(kt, ratio)
    success = float(_coupled_success(lt, lr, kt, ratio))
    return KappaResult(kt, kr, success, threshold, True, OK, k_real)


def average_rank(records: Sequence[JournalRecord]) -> RankTable:
    """Expected average percentile of each journal's papers in the pooled set.

    R_t = sum_r N_r * csi(t, r) / sum_r N_r, with r running over every
    journal including t itself (whose self term is exactly one half).
    """
    records = list(records)
    if not records:
        raise DomainError("average_rank needs at least one journal")
    ids = [j.id for j in records]
    if len(set(ids)) != len(ids):
        raise InvariantError("journal ids must be unique")
    order = sorted(records, key=lambda j: _id_key(j.id))
    total = math.fsum(j.n_papers for j in order)
    values = {}
    for t in order:
        terms = []
        for r in order:
            s = 0.5 if r.id == t.id else csi(t.lognormal, r.lognormal)
            terms.append(r.n_papers * s)
        values[t.id] = math.fsum(terms) / total
    return RankTable(values, {j.id: j.n_papers for j in order})
