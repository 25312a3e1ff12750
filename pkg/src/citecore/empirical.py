"""Indicators computed directly from per-paper citation counts.

Counts are raw citations c (not shifted); the +1 shift is applied only when
moments are taken. Real-valued counts are accepted so that continuous
synthetic samples can be analysed with the same code; since the model lives
on c + 1, such samples only need c > -1.

Pairwise comparisons use a half-credit convention for ties, which makes
``empirical_csi(t, r) + empirical_csi(r, t) == 1`` and lets the pooled
average rank equal the weighted sum of pairwise CSI values.
"""
from __future__ import annotations

import math
from typing import Mapping, Optional, Sequence

import numpy as np

from citecore.errors import DomainError
from citecore.estimated import (
    CAP_EXCEEDED,
    LIMIT_UNREACHABLE,
    OK,
    KappaResult,
    RankTable,
    _id_key,
    coupled_kr,
)
from citecore.lognormal import ArithMoments, LogMoments

DEFAULT_EMPIRICAL_CAP = 10**4
# elements per chunk of resampling indices
_CHUNK_ELEMS = 1 << 21


def as_citations(counts) -> np.ndarray:
    """Validate a citation vector and return it as a 1-d numpy array."""
    arr = np.asarray(counts)
    if arr.ndim != 1 or arr.size == 0:
        raise DomainError("a citation vector must be a nonempty 1-d sequence")
    if arr.dtype.kind not in "iuf":
        arr = arr.astype(float)
    if arr.dtype.kind == "f":
        if not np.all(np.isfinite(arr)):
            raise DomainError("citation counts must be finite")
        if np.any(arr <= -1):
            raise DomainError("real-valued counts must satisfy c > -1")
    elif np.any(arr < 0):
        raise DomainError("citation counts must be >= 0")
    return arr


def empirical_moments(counts) -> tuple[ArithMoments, LogMoments]:
    """Population mean/std of c + 1 and of ln(c + 1)."""
    c1 = as_citations(counts).astype(float) + 1.0
    logs = np.log(c1)
    return (
        ArithMoments(float(c1.mean()), float(c1.std())),
        LogMoments(float(logs.mean()), float(logs.std())),
    )


def empirical_h_index(counts) -> int:
    """Largest h such that h papers have at least h citations each."""
    c = np.sort(as_citations(counts))[::-1]
    ranks = np.arange(1, c.size + 1)
    return int(np.count_nonzero(c >= ranks))


def _beaten_and_tied(x: np.ndarray, sorted_pool: np.ndarray) -> tuple[int, int]:
    """Number of (x_i, p) pairs with x_i > p, and with x_i == p."""
    left = np.searchsorted(sorted_pool, x, side="left")
    right = np.searchsorted(sorted_pool, x, side="right")
    return int(left.sum()), int((right - left).sum())


def empirical_csi(t, r) -> float:
    """Fraction of all paper pairs (from t, from r) won by t; ties count half.

    Sort-and-search, O((|t| + |r|) log |r|).
    """
    t = as_citations(t)
    r = np.sort(as_citations(r))
    wins, ties = _beaten_and_tied(t, r)
    return (2 * wins + ties) / (2 * t.size * r.size)


def _group_sums(rng: np.random.Generator, data: np.ndarray, k: int, trials: int) -> np.ndarray:
    """Sums of ``k`` draws with replacement from ``data``, one per trial."""
    out = np.empty(trials, dtype=data.dtype if data.dtype.kind in "iu" else float)
    step = max(1, _CHUNK_ELEMS // k)
    for lo in range(0, trials, step):
        hi = min(trials, lo + step)
        idx = rng.integers(0, data.size, size=(hi - lo, k))
        out[lo:hi] = data[idx].sum(axis=1)
    return out


def empirical_group_csi(t, k_t: int, r, k_r: int, trials: int, seed: int) -> float:
    """Monte Carlo probability that the mean of k_t resampled papers of t
    exceeds the mean of k_r resampled papers of r (ties count half).

    Draws are with replacement from the given vectors. The generator is
    built from ``seed`` inside the call, so results are reproducible and
    concurrent calls share no state.
    """
    t = as_citations(t)
    r = as_citations(r)
    for name, k in (("k_t", k_t), ("k_r", k_r), ("trials", trials)):
        if isinstance(k, bool) or int(k) != k or k < 1:
            raise DomainError(f"{name} must be a positive integer, got {k!r}")
    k_t, k_r, trials = int(k_t), int(k_r), int(trials)
    rng = np.random.default_rng(seed)
    st = _group_sums(rng, t, k_t, trials)
    sr = _group_sums(rng, r, k_r, trials)
    # compare sum_t / k_t with sum_r / k_r without dividing (exact for integer data)
    lhs = st * k_r
    rhs = sr * k_t
    wins = int(np.count_nonzero(lhs > rhs))
    ties = int(np.count_nonzero(lhs == rhs))
    return (2 * wins + ties) / (2 * trials)


def empirical_kappa(
    t,
    r,
    threshold: float = 0.9,
    trials: int = 10_000,
    seed: int = 0,
    cap: int = DEFAULT_EMPIRICAL_CAP,
) -> KappaResult:
    """Minimum representative sizes measured by resampling the raw data.

    Group sizes are coupled through the vectors' own standard deviations,
    k_r = max(1, round(k_t * v_r / v_t)). The search walks k_t upward by
    doubling until the threshold is met, then bisects the last interval;
    every evaluation reuses ``seed`` (common random numbers) so neighbouring
    sizes see correlated noise.
    """
    if not 0.5 < threshold < 1:
        raise DomainError(f"threshold must lie in (0.5, 1), got {threshold}")
    t = as_citations(t)
    r = as_citations(r)
    at, _ = empirical_moments(t)
    ar, _ = empirical_moments(r)
    if not at.m > ar.m:
        return KappaResult(None, None, None, threshold, False, LIMIT_UNREACHABLE)
    if at.v == 0:
        ratio = 1.0 if ar.v == 0 else math.inf
    else:
        ratio = ar.v / at.v
    if not math.isfinite(ratio):
        raise DomainError("size coupling is undefined for a zero-variance journal t")

    def success(kt: int) -> float:
        return empirical_group_csi(t, kt, r, coupled_kr(kt, ratio), trials, seed)

    s = success(1)
    if s >= threshold:
        return KappaResult(1, coupled_kr(1, ratio), s, threshold, True, OK)
    lo, hi = 1, 2
    while True:
        if hi > cap or coupled_kr(hi, ratio) > cap:
            return KappaResult(None, None, None, threshold, False, CAP_EXCEEDED)
        s = success(hi)
        if s >= threshold:
            break
        lo, hi = hi, 2 * hi
    best = s
    while hi - lo > 1:
        mid = (lo + hi) // 2
        s = success(mid)
        if s >= threshold:
            hi, best = mid, s
        else:
            lo = mid
    return KappaResult(hi, coupled_kr(hi, ratio), best, threshold, True, OK)


def empirical_average_rank(journals) -> RankTable:
    """Mean pooled percentile of each journal's papers.

    ``journals`` is a mapping or a sequence of (id, counts). A paper's
    percentile is (papers with fewer citations + half the papers tied with
    it, itself included) / total papers.
    """
    items = list(journals.items()) if isinstance(journals, Mapping) else list(journals)
    if not items:
        raise DomainError("empirical_average_rank needs at least one journal")
    ids = [jid for jid, _ in items]
    if len(set(ids)) != len(ids):
        raise DomainError("journal ids must be unique")
    items.sort(key=lambda kv: _id_key(kv[0]))
    vectors = [as_citations(c) for _, c in items]
    pool = np.sort(np.concatenate(vectors))
    total = pool.size
    values = {}
    for (jid, _), vec in zip(items, vectors):
        below, tied = _beaten_and_tied(vec, pool)
        values[jid] = (2 * below + tied) / (2 * total * vec.size)
    return RankTable(values, {jid: int(vec.size) for (jid, _), vec in zip(items, vectors)})
