"""Seeded simulation of synthetic journals and formula-vs-simulation checks.

Random streams come from numpy's PCG64 seeded through ``SeedSequence`` with
a per-task spawn key, so every journal or pair has its own substream and the
report does not depend on evaluation order. Normal deviates are produced by
the inverse-CDF transform of open-interval uniforms, one uniform per
deviate.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Optional, Sequence

import numpy as np
import scipy
from scipy import special

from citecore.empirical import empirical_csi, empirical_h_index
from citecore.errors import CitecoreError, DomainError
from citecore.estimated import (
    JournalRecord,
    _id_key,
    average_rank,
    csi,
    estimate_h_index,
    group_csi,
    min_representative_size,
)
from citecore.lognormal import LogMoments, _group_params

_CHUNK_ELEMS = 1 << 21
_U53 = 2.0**-53


@dataclass(frozen=True)
class SimulationConfig:
    seed: int
    n_samples: int = 100_000
    discretize: bool = False
    tolerance: float = 0.02
    k_t: int = 10
    k_r: int = 10
    threshold: float = 0.9
    # kappa checks simulate groups of size kappa; pairs needing larger groups are skipped
    kappa_max_size: int = 2000
    kappa_trials: Optional[int] = None

    def __post_init__(self):
        if self.n_samples < 1:
            raise DomainError("n_samples must be >= 1")
        # zero is allowed: it exposes the Monte Carlo noise floor as failures
        if not self.tolerance >= 0:
            raise DomainError("tolerance must be >= 0")
        if self.k_t < 1 or self.k_r < 1:
            raise DomainError("group sizes must be >= 1")


@dataclass
class ValidationEntry:
    name: str
    subject: str
    formula_value: float
    mc_value: float
    abs_error: float
    passed: bool

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "subject": self.subject,
            "formula_value": self.formula_value,
            "mc_value": self.mc_value,
            "abs_error": self.abs_error,
            "pass": self.passed,
        }


@dataclass
class ValidationReport:
    generator: dict
    config: dict
    entries: list = field(default_factory=list)
    skipped: list = field(default_factory=list)

    @property
    def all_pass(self) -> bool:
        return all(e.passed for e in self.entries)

    def failures(self) -> list:
        return [e for e in self.entries if not e.passed]

    def to_dict(self) -> dict:
        return {
            "generator": self.generator,
            "config": self.config,
            "all_pass": self.all_pass,
            "n_entries": len(self.entries),
            "n_failed": len(self.failures()),
            "entries": [e.to_dict() for e in self.entries],
            "skipped": self.skipped,
        }


def generator_info() -> dict:
    return {
        "bit_generator": "PCG64",
        "seeding": "SeedSequence(seed, spawn_key=task)",
        "normal_transform": "inverse CDF, scipy.special.ndtri",
        "numpy": np.__version__,
        "scipy": scipy.__version__,
    }


def make_rng(seed: int, *task: int) -> np.random.Generator:
    """Independent generator for ``task`` under a master ``seed``."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=task)))


def standard_normals(rng: np.random.Generator, size) -> np.ndarray:
    """Standard normal deviates by inverse CDF of uniforms on (0, 1)."""
    u = (rng.integers(0, 1 << 53, size=size, dtype=np.int64) + 0.5) * _U53
    return special.ndtri(u)


def sample_lognormal(
    lm: LogMoments,
    n: int,
    seed: int,
    discretize: bool = False,
    task: Sequence[int] = (),
) -> np.ndarray:
    """``n`` synthetic citation counts whose c + 1 is log-normal(``lm``).

    Continuous samples can fall in (-1, 0) because the model lives on c + 1.
    With ``discretize`` they are rounded to the nearest nonnegative integer.
    """
    if n < 1:
        raise DomainError("n must be >= 1")
    rng = make_rng(seed, *task)
    z = standard_normals(rng, n)
    c = np.exp(lm.mu_ln + lm.sigma_ln * z) - 1.0
    if discretize:
        return np.maximum(np.rint(c), 0).astype(np.int64)
    return c


def sample_group_means(lm: LogMoments, k: int, trials: int, rng: np.random.Generator) -> np.ndarray:
    """``trials`` means of ``k`` fresh draws of c + 1 from the log-normal."""
    out = np.empty(trials)
    step = max(1, _CHUNK_ELEMS // k)
    for lo in range(0, trials, step):
        hi = min(trials, lo + step)
        z = standard_normals(rng, (hi - lo, k))
        out[lo:hi] = np.exp(lm.mu_ln + lm.sigma_ln * z).mean(axis=1)
    return out


def simulated_group_csi(
    t: LogMoments, k_t: int, r: LogMoments, k_r: int, trials: int, seed: int, task: Sequence[int] = ()
) -> float:
    """P(mean of k_t draws from t > mean of k_r draws from r), simulated."""
    gt = sample_group_means(t, k_t, trials, make_rng(seed, *task, 0))
    gr = sample_group_means(r, k_r, trials, make_rng(seed, *task, 1))
    wins = np.count_nonzero(gt > gr)
    ties = np.count_nonzero(gt == gr)
    return (2 * wins + ties) / (2 * trials)


GROUP_FORMS = {
    "mean-matched": {},
    "sum-shift": {"sum_shift": True},
    "half-exponent": {"half_exponent": True},
    "sum-shift+half-exponent": {"sum_shift": True, "half_exponent": True},
}


def group_form_experiment(
    t: LogMoments, k_t: int, r: LogMoments, k_r: int, trials: int, seed: int
) -> dict:
    """Simulated group-group success next to each candidate closed form.

    Returns ``{"mc": p, "se": standard_error, "forms": {form: value}}``.
    """
    mc = simulated_group_csi(t, k_t, r, k_r, trials, seed)
    se = math.sqrt(max(mc * (1 - mc), 1e-300) / trials)
    forms = {}
    for name, kw in GROUP_FORMS.items():
        mt, st = _group_params(t.mu_ln, t.sigma_ln, k_t, **kw)
        mr, sr = _group_params(r.mu_ln, r.sigma_ln, k_r, **kw)
        z = (mt - mr) / math.hypot(float(st), float(sr))
        forms[name] = float(special.ndtr(z))
    return {"mc": mc, "se": se, "forms": forms}


def _entry(name, subject, formula, mc, tol) -> ValidationEntry:
    err = abs(float(formula) - float(mc))
    return ValidationEntry(name, subject, float(formula), float(mc), err, err <= tol)


def validate_all(journals: Sequence[JournalRecord], cfg: SimulationConfig) -> ValidationReport:
    """Compare every moment-based indicator with its simulated counterpart.

    Each journal's log moments are derived from its (m, v). Indicators:

    * ``h_index_per_paper``: h / N, simulated as the mean empirical h over
      replicate journals of N papers (about ``n_samples`` papers in total);
    * ``csi``: per pair, empirical CSI of two synthetic samples;
    * ``group_csi``: per pair at (k_t, k_r), from simulated group means;
    * ``group_csi_at_kappa``: per pair with a reachable kappa, the success
      probability at the estimated kappa, simulated;
    * ``average_rank``: per journal, N-weighted pairwise simulated CSI,
      which equals the pooled rank of an N-proportional synthetic set.

    Degenerate or unreachable pairs are listed in ``skipped``.
    """
    recs = sorted((j.with_derived_log() for j in journals), key=lambda j: _id_key(j.id))
    if not recs:
        raise DomainError("validate_all needs at least one journal")
    tol = cfg.tolerance
    n = cfg.n_samples
    report = ValidationReport(generator_info(), asdict(cfg))

    for i, j in enumerate(recs):
        h_real, _ = estimate_h_index(j)
        reps = max(1, n // j.n_papers)
        rng = make_rng(cfg.seed, 0, i)
        hs = []
        for _ in range(reps):
            z = standard_normals(rng, j.n_papers)
            c = np.exp(j.log.mu_ln + j.log.sigma_ln * z) - 1.0
            if cfg.discretize:
                c = np.maximum(np.rint(c), 0)
            hs.append(empirical_h_index(c))
        report.entries.append(
            _entry("h_index_per_paper", j.id, h_real / j.n_papers, np.mean(hs) / j.n_papers, tol)
        )

    samples = [
        np.sort(sample_lognormal(j.log, n, cfg.seed, cfg.discretize, task=(1, i)))
        for i, j in enumerate(recs)
    ]
    ks = sorted({cfg.k_t, cfg.k_r})
    groups = {
        (i, k): np.sort(sample_group_means(j.log, k, n, make_rng(cfg.seed, 2, i, k)))
        for i, j in enumerate(recs)
        for k in ks
    }

    if len(recs) == 1:
        own = sample_lognormal(recs[0].log, n, cfg.seed, cfg.discretize, task=(1, 0, 1))
        report.entries.append(_entry("csi", f"{recs[0].id}|{recs[0].id}", 0.5,
                                     empirical_csi(own, samples[0]), tol))

    sim_csi = np.full((len(recs), len(recs)), 0.5)
    ktrials = cfg.kappa_trials or max(1, n // 10)
    for a in range(len(recs)):
        for b in range(a + 1, len(recs)):
            t, r = recs[a], recs[b]
            subject = f"{t.id}|{r.id}"
            try:
                f_csi = csi(t.log, r.log)
            except CitecoreError as exc:
                report.skipped.append({"name": "csi", "subject": subject, "reason": str(exc)})
                sim_csi[a, b] = sim_csi[b, a] = math.nan
                continue
            m_csi = empirical_csi(samples[a], samples[b])
            sim_csi[a, b], sim_csi[b, a] = m_csi, 1.0 - m_csi
            report.entries.append(_entry("csi", subject, f_csi, m_csi, tol))

            f_g = group_csi(t.log, cfg.k_t, r.log, cfg.k_r)
            m_g = empirical_csi(groups[(a, cfg.k_t)], groups[(b, cfg.k_r)])
            report.entries.append(_entry(f"group_csi[{cfg.k_t},{cfg.k_r}]", subject, f_g, m_g, tol))

            hi, lo = (t, r) if t.log.implied_mean >= r.log.implied_mean else (r, t)
            kres = min_representative_size(hi, lo, cfg.threshold)
            ksubject = f"{hi.id}|{lo.id}"
            if not kres.reachable:
                report.skipped.append({"name": "group_csi_at_kappa", "subject": ksubject,
                                       "reason": kres.status})
                continue
            if kres.kappa_t + kres.kappa_r > cfg.kappa_max_size:
                report.skipped.append({"name": "group_csi_at_kappa", "subject": ksubject,
                                       "reason": f"kappa=({kres.kappa_t},{kres.kappa_r}) above kappa_max_size"})
                continue
            m_k = simulated_group_csi(hi.log, kres.kappa_t, lo.log, kres.kappa_r, ktrials,
                                      cfg.seed, task=(3, a, b))
            report.entries.append(
                _entry("group_csi_at_kappa", f"{ksubject}@{kres.kappa_t},{kres.kappa_r}",
                       kres.success_at_kappa, m_k, tol)
            )

    if not np.isnan(sim_csi).any():
        formula_rank = average_rank(recs)
        weights = np.array([j.n_papers for j in recs], dtype=float)
        mc_rank = sim_csi @ weights / weights.sum()
        for i, j in enumerate(recs):
            report.entries.append(_entry("average_rank", j.id, formula_rank[j.id], mc_rank[i], tol))
    else:
        report.skipped.append({"name": "average_rank", "subject": "*", "reason": "degenerate pair"})
    return report
