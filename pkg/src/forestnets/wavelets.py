"""Multiresolution analysis of signals on networks.

One analysis step splits a signal into a smoothed part carried by a kept
vertex set and a detail part carried by the dropped vertices:

* approximation: run the walk killed at rate ``q'`` and record the
  expected signal value at the stopping position, read on kept vertices;
* detail: the difference between that smoothing and the signal itself,
  read on dropped vertices.

The step is exactly invertible.  Iterating it on successive Schur
reductions gives a pyramid: detail vectors at every level plus one apex
vector on the final coarse network.  This module builds pyramids with
forest-sampled kept sets, reconstructs exactly, compresses by discarding
small detail coefficients, and evaluates the stability bounds that
control each operator of the transform.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import coarsegrain as cg
from . import config, oracle, sampler
from .errors import DegenerateBasis, InvalidParams, NumericalError
from .network import Network
from .norms import condition_measure, holder_conjugate, lp_norm

_MAX_ROOT_RETRIES = 64


def _split(net: Network, keep: Sequence[int]) -> tuple[np.ndarray, np.ndarray]:
    kept = np.asarray(sorted(set(int(v) for v in keep)), dtype=np.int64)
    if kept.size == 0 or kept.size >= net.n:
        raise InvalidParams("kept set must be a proper nonempty subset")
    if kept[0] < 0 or kept[-1] >= net.n:
        raise InvalidParams(f"kept ids must lie in 0..{net.n - 1}")
    dropped = np.setdiff1d(np.arange(net.n), kept)
    return kept, dropped


def _as_signal(values: Sequence[float], n: int) -> np.ndarray:
    f = np.asarray(values, dtype=float)
    if f.shape != (n,):
        raise InvalidParams(f"signal must have shape ({n},), got {f.shape}")
    return f


# ---------------------------------------------------------------------------
# one level


def analyze_level(
    net: Network, keep: Sequence[int], q_prime: float, values: Sequence[float]
) -> tuple[np.ndarray, np.ndarray]:
    """Split a signal into (approximation on kept, detail on dropped)."""
    kept, dropped = _split(net, keep)
    f = _as_signal(values, net.n)
    K = oracle.green(net, q_prime).K
    smooth = K @ f
    return smooth[kept], (smooth - f)[dropped]


def reconstruct_level(
    net: Network,
    keep: Sequence[int],
    q_prime: float,
    approx: Sequence[float],
    detail: Sequence[float],
) -> np.ndarray:
    """Exact inverse of :func:`analyze_level`.

    The approximation is lifted through ``Id - Lbar/q'`` on kept vertices
    and through harmonic extension on dropped ones; the detail is lifted
    through the complementary blocks.  ``Lbar`` is the exact Schur
    complement of the generator on the kept set.
    """
    kept, dropped = _split(net, keep)
    fb = _as_signal(approx, kept.size)
    fd = _as_signal(detail, dropped.size)
    L = net.dense_L()
    A = -L[np.ix_(dropped, dropped)]
    L_kd = L[np.ix_(kept, dropped)]
    L_dk = L[np.ix_(dropped, kept)]
    Lbar = cg.schur_complement(net, kept)
    inv_detail = np.linalg.solve(A, fd)
    out = np.empty(net.n)
    out[kept] = fb - (Lbar @ fb) / q_prime + L_kd @ inv_detail
    out[dropped] = np.linalg.solve(A, L_dk @ fb) - fd - q_prime * inv_detail
    return out


def basis_functions(
    net: Network, keep: Sequence[int], q_prime: float, check: bool = True
) -> tuple[np.ndarray, np.ndarray]:
    """Analysis basis as functions on the network.

    Row ``i`` of the first block is the scaling function of kept vertex
    ``i`` (killed-walk kernel row over ``mu``); row ``j`` of the second is
    the wavelet of dropped vertex ``j``, which has zero mean under ``mu``.
    Analysis coefficients are ``mu``-inner products against these rows.
    """
    kept, dropped = _split(net, keep)
    K = oracle.green(net, q_prime).K
    scaling = K[kept, :] / net.mu[None, :]
    wavelets = (K - np.eye(net.n))[dropped, :] / net.mu[None, :]
    if check:
        stacked = np.vstack([scaling, wavelets])
        g = (stacked * net.mu[None, :]) @ stacked.T
        lam = np.linalg.eigvalsh(0.5 * (g + g.T))
        if lam[0] <= config.GRAM_SINGULAR_REL * max(lam[-1], 1e-300):
            raise DegenerateBasis(
                "analysis basis is numerically linearly dependent"
            )
    return scaling, wavelets


# ---------------------------------------------------------------------------
# pyramids


@dataclass
class PyramidLevel:
    """One analysis step of a pyramid.

    ``network`` is the level's network (level 0 is the base).  ``keep``
    and ``dropped`` are index sets into that network; position ``i`` of
    the next level corresponds to ``keep[i]`` here.  ``mu`` is the base
    invariant measure conditioned down to this level and ``base_mass``
    the total base-measure weight the level still carries.
    """

    network: Network
    mu: np.ndarray
    base_mass: float
    keep: np.ndarray
    dropped: np.ndarray
    q_prime: float
    detail: np.ndarray
    next_network: Network
    q_tuning: float | None = None

    @property
    def n(self) -> int:
        return self.network.n


@dataclass
class Pyramid:
    base: Network
    levels: list[PyramidLevel]
    apex: np.ndarray
    apex_mu: np.ndarray
    apex_base_mass: float
    seed: int | None = None

    @property
    def depth(self) -> int:
        return len(self.levels)

    def detail_count(self) -> int:
        return sum(lvl.dropped.size for lvl in self.levels)


def _choose_q(
    net: Network,
    q_grid: Sequence[float] | None,
    n_tuning: int,
    tune_seed: int,
    threads: int,
) -> float:
    records = sampler.estimate_tuning(
        net, q_grid, n_tuning, seed=tune_seed, threads=threads
    )
    best = min(records, key=lambda r: (r.objective, -r.q))
    return best.q


def _draw_keep(
    net: Network, q: float, seed: int, level: int
) -> tuple[np.ndarray, float]:
    for retry in range(_MAX_ROOT_RETRIES):
        forest = sampler.wilson_sample(
            net, q, seed=seed, sample_index=(level << 8) | retry
        )
        roots = forest.roots
        if 0 < roots.size < net.n:
            m = roots.size
            q_prime = 2.0 * net.w_max * m / (net.n - m)
            return roots, q_prime
    raise NumericalError(
        f"no proper root subset in {_MAX_ROOT_RETRIES} draws at q={q}"
    )


def build_pyramid(
    net: Network,
    values: Sequence[float],
    *,
    seed: int | None = None,
    max_levels: int | None = None,
    min_size: int = 2,
    q_grid: Sequence[float] | None = None,
    n_tuning_samples: int = 16,
    sparsify_theta: float | None = None,
    forced_keep: Sequence[Sequence[int]] | None = None,
    forced_q_prime: Sequence[float] | None = None,
    threads: int = 1,
) -> Pyramid:
    """Build a multiresolution pyramid for a signal.

    Kept sets are the roots of a sampled spanning forest at a killing
    rate tuned per level (grid search minimizing the estimated stability
    objective), and the smoothing rate is ``2 w_max |roots| / |dropped|``.
    ``forced_keep`` bypasses sampling with explicit per-level kept sets
    (in that level's coordinates); ``forced_q_prime`` optionally pins the
    smoothing rates alongside it.  When ``sparsify_theta`` is set, each
    reduced network is sparsified before feeding the next level; the
    exact Schur complement is still what the reconstruction of the
    current level uses.
    """
    f = _as_signal(values, net.n)
    if forced_keep is None and seed is None:
        raise InvalidParams("seed is required when kept sets are sampled")
    if forced_q_prime is not None:
        if forced_keep is None or len(forced_q_prime) != len(forced_keep):
            raise InvalidParams(
                "forced_q_prime requires forced_keep of the same length"
            )
    if min_size < 2:
        raise InvalidParams("min_size must be at least 2")

    levels: list[PyramidLevel] = []
    current = net
    mu = net.mu.copy()
    mass = 1.0
    while current.n >= min_size:
        if max_levels is not None and len(levels) >= max_levels:
            break
        idx = len(levels)
        if forced_keep is not None:
            if idx >= len(forced_keep):
                break
            kept, dropped = _split(current, forced_keep[idx])
            if forced_q_prime is not None:
                q_prime = float(forced_q_prime[idx])
                if q_prime <= 0:
                    raise InvalidParams("forced q' must be positive")
            else:
                q_prime = 2.0 * current.w_max * kept.size / dropped.size
            q_tuning = None
        else:
            q_tuning = _choose_q(
                current, q_grid, n_tuning_samples, seed + idx + 1, threads
            )
            roots, q_prime = _draw_keep(current, q_tuning, seed, idx)
            kept, dropped = _split(current, roots)

        approx, detail = analyze_level(current, kept, q_prime, f)
        reduction = cg.schur_reduce(current, kept)
        next_net = reduction.network
        if sparsify_theta is not None:
            next_net = cg.sparsify(reduction, q_prime, sparsify_theta).network

        levels.append(
            PyramidLevel(
                network=current,
                mu=mu,
                base_mass=mass,
                keep=kept,
                dropped=dropped,
                q_prime=q_prime,
                detail=detail,
                next_network=next_net,
                q_tuning=q_tuning,
            )
        )
        mass *= float(mu[kept].sum())
        mu = condition_measure(mu, kept)
        current = next_net
        f = approx

    return Pyramid(
        base=net,
        levels=levels,
        apex=f,
        apex_mu=mu,
        apex_base_mass=mass,
        seed=seed,
    )


def _reconstruct(pyr: Pyramid, apex: np.ndarray, details: list[np.ndarray]) -> np.ndarray:
    f = apex
    for lvl, det in zip(reversed(pyr.levels), reversed(details)):
        f = reconstruct_level(lvl.network, lvl.keep, lvl.q_prime, f, det)
    return f


def reconstruct_pyramid(pyr: Pyramid) -> np.ndarray:
    """Invert the full pyramid (exact up to roundoff)."""
    return _reconstruct(pyr, pyr.apex, [lvl.detail for lvl in pyr.levels])


def approximation(pyr: Pyramid) -> np.ndarray:
    """Reconstruction from the apex alone, every detail set to zero."""
    zeros = [np.zeros(lvl.dropped.size) for lvl in pyr.levels]
    return _reconstruct(pyr, pyr.apex, zeros)


def signal_levels(pyr: Pyramid) -> list[np.ndarray]:
    """Smoothed signal at each level, from the base signal down to the
    apex (length ``depth + 1``)."""
    out = [pyr.apex]
    for lvl, det in zip(reversed(pyr.levels), reversed([l.detail for l in pyr.levels])):
        out.append(reconstruct_level(lvl.network, lvl.keep, lvl.q_prime, out[-1], det))
    out.reverse()
    return out


# ---------------------------------------------------------------------------
# compression


@dataclass
class CompressionResult:
    keep_count: int
    total_details: int
    values: np.ndarray
    rel_error: float


def _detail_scores(pyr: Pyramid) -> list[tuple[float, int, int]]:
    """Detail coefficients ranked by energy contribution to the base
    2-norm: |coefficient| times the square root of the base-measure mass
    of the vertex carrying it.  Ties break deterministically."""
    scored = []
    for li, lvl in enumerate(pyr.levels):
        base_w = lvl.mu[lvl.dropped] * lvl.base_mass
        for di in range(lvl.dropped.size):
            scored.append(
                (float(np.abs(lvl.detail[di]) * np.sqrt(base_w[di])), li, di)
            )
    scored.sort(key=lambda t: (-t[0], t[1], t[2]))
    return scored


def compress(pyr: Pyramid, keep_count: int) -> CompressionResult:
    """Reconstruct keeping only the ``keep_count`` largest detail
    coefficients (nested: larger counts always include smaller ones)."""
    total = pyr.detail_count()
    if not (0 <= keep_count <= total):
        raise InvalidParams(f"keep_count must lie in 0..{total}")
    details = [np.zeros(lvl.dropped.size) for lvl in pyr.levels]
    for _, li, di in _detail_scores(pyr)[:keep_count]:
        details[li][di] = pyr.levels[li].detail[di]
    values = _reconstruct(pyr, pyr.apex, details)
    exact = reconstruct_pyramid(pyr)
    mu = pyr.levels[0].mu if pyr.levels else pyr.apex_mu
    denom = lp_norm(exact, mu, 2.0)
    if denom == 0.0:
        rel = 0.0
    else:
        rel = lp_norm(values - exact, mu, 2.0) / denom
    return CompressionResult(
        keep_count=keep_count,
        total_details=total,
        values=values,
        rel_error=float(rel),
    )


def compression_curve(
    pyr: Pyramid, fractions: Sequence[float]
) -> list[CompressionResult]:
    """Compression results at several kept fractions of the detail
    budget (fraction 1 keeps everything and is exact)."""
    total = pyr.detail_count()
    out = []
    for frac in fractions:
        if not (0.0 <= frac <= 1.0):
            raise InvalidParams("fractions must lie in [0, 1]")
        out.append(compress(pyr, int(round(frac * total))))
    return out


# ---------------------------------------------------------------------------
# stability bounds


def _approx_factor(w_bar: float, w: float, beta: float, qp: float, p: float) -> float:
    a = 1.0 + 2.0 * w_bar / qp
    if p == math.inf:
        return a
    return (a**p + w / beta) ** (1.0 / p)


def _detail_factor(w: float, beta: float, gamma: float, qp: float, p: float) -> float:
    b = 1.0 + qp / gamma if math.isfinite(gamma) else 1.0
    if p == math.inf:
        return max(w / beta, b)
    pstar = holder_conjugate(p)
    lead = (w / beta) ** (p / pstar) if pstar != math.inf else 1.0
    return (lead + b**p) ** (1.0 / p)


def approx_check(
    net: Network,
    keep: Sequence[int],
    q_prime: float,
    coarse: Sequence[float],
    p: float,
) -> tuple[float, float]:
    """(measured, bound) for lifting a coarse signal back to the level.

    Measured is the conditioned p-norm of the lifted signal; the bound is
    the approximation-operator constant times the kept-mass correction
    times the coarse norm.
    """
    kept, dropped = _split(net, keep)
    fb = _as_signal(coarse, kept.size)
    lifted = reconstruct_level(net, kept, q_prime, fb, np.zeros(dropped.size))
    measured = lp_norm(lifted, net.mu, p)
    red = cg.schur_reduce(net, kept)
    beta, _ = cg.beta_gamma(net, kept)
    factor = _approx_factor(red.network.w_max, net.w_max, beta, q_prime, p)
    mass = float(net.mu[kept].sum())
    mass_f = mass ** (1.0 / p) if p != math.inf else 1.0
    bound = factor * mass_f * lp_norm(fb, condition_measure(net.mu, kept), p)
    return float(measured), float(bound)


def detail_check(
    net: Network,
    keep: Sequence[int],
    q_prime: float,
    detail: Sequence[float],
    p: float,
) -> tuple[float, float]:
    """(measured, bound) for lifting a detail vector back to the level."""
    kept, dropped = _split(net, keep)
    fd = _as_signal(detail, dropped.size)
    lifted = reconstruct_level(net, kept, q_prime, np.zeros(kept.size), fd)
    measured = lp_norm(lifted, net.mu, p)
    beta, gamma = cg.beta_gamma(net, kept)
    factor = _detail_factor(net.w_max, beta, gamma, q_prime, p)
    mass = float(net.mu[dropped].sum())
    mass_f = mass ** (1.0 / p) if p != math.inf else 1.0
    bound = factor * mass_f * lp_norm(fd, condition_measure(net.mu, dropped), p)
    return float(measured), float(bound)


def detail_size_check(
    net: Network,
    keep: Sequence[int],
    q_prime: float,
    values: Sequence[float],
    p: float,
) -> tuple[float, float]:
    """(measured, bound) for the size of a signal's detail coefficients:
    smooth signals (small ``L f``) produce small details."""
    kept, dropped = _split(net, keep)
    f = _as_signal(values, net.n)
    _, fd = analyze_level(net, kept, q_prime, f)
    measured = lp_norm(fd, condition_measure(net.mu, dropped), p)
    K = oracle.green(net, q_prime).K
    lf = net.dense_L() @ f
    if p == math.inf:
        factor = 1.0 / q_prime
    else:
        hit_mass = float(K[:, dropped].sum(axis=1).max())
        mass = float(net.mu[dropped].sum())
        factor = hit_mass ** (1.0 / p) / (q_prime * mass ** (1.0 / p))
    return float(measured), float(factor * lp_norm(lf, net.mu, p))


@dataclass
class LevelBounds:
    level: int
    q_prime: float
    approx_measured: float
    approx_bound: float
    detail_measured: float
    detail_bound: float
    detail_size_measured: float
    detail_size_bound: float


@dataclass
class StabilityReport:
    p: float
    levels: list[LevelBounds]
    analysis_measured: float
    analysis_bound: float
    approx_gap_measured: float
    approx_gap_bound: float

    def all_dominated(self, slack: float = 1e-9) -> bool:
        ok = (
            self.analysis_measured <= self.analysis_bound + slack
            and self.approx_gap_measured <= self.approx_gap_bound + slack
        )
        for lb in self.levels:
            ok = ok and lb.approx_measured <= lb.approx_bound + slack
            ok = ok and lb.detail_measured <= lb.detail_bound + slack
            ok = ok and lb.detail_size_measured <= lb.detail_size_bound + slack
        return ok


def stability_bounds(pyr: Pyramid, p: float) -> StabilityReport:
    """Measured norms versus their a priori bounds, per level and for the
    whole transform.

    Per level: the approximation and detail lift operators applied to the
    pyramid's own coefficients, and the detail-size inequality against
    the roughness ``L f`` of the level signal.  Globally: the composite
    analysis norm against ``2^(1/p*) (1+N)^(1/p) ||f||``, and the gap
    between the signal and its pure approximation against the cascade
    bound built from per-level constants.
    """
    if p != math.inf and p < 1:
        raise InvalidParams("p must be >= 1 or inf")
    if not pyr.levels:
        raise InvalidParams("pyramid has no levels")
    sigs = signal_levels(pyr)
    base_mu = pyr.levels[0].mu
    f0 = sigs[0]
    pstar = holder_conjugate(p)

    level_rows = []
    betas, gammas, factors_a, factors_d = [], [], [], []
    for i, lvl in enumerate(pyr.levels):
        am, ab = approx_check(lvl.network, lvl.keep, lvl.q_prime, sigs[i + 1], p)
        dm, db = detail_check(lvl.network, lvl.keep, lvl.q_prime, lvl.detail, p)
        sm, sb = detail_size_check(lvl.network, lvl.keep, lvl.q_prime, sigs[i], p)
        beta, gamma = cg.beta_gamma(lvl.network, lvl.keep)
        betas.append(beta)
        gammas.append(gamma)
        factors_a.append(
            _approx_factor(
                lvl.next_network.w_max, lvl.network.w_max, beta, lvl.q_prime, p
            )
        )
        factors_d.append(
            _detail_factor(lvl.network.w_max, beta, gamma, lvl.q_prime, p)
        )
        level_rows.append(
            LevelBounds(
                level=i,
                q_prime=lvl.q_prime,
                approx_measured=am,
                approx_bound=ab,
                detail_measured=dm,
                detail_bound=db,
                detail_size_measured=sm,
                detail_size_bound=sb,
            )
        )

    # composite analysis norm: base-mass-weighted conditioned norms of the
    # apex and of each detail vector
    n_levels = len(pyr.levels)
    if p == math.inf:
        parts = [lp_norm(pyr.apex, pyr.apex_mu, p)]
        for lvl in pyr.levels:
            if lvl.dropped.size:
                parts.append(
                    lp_norm(lvl.detail, condition_measure(lvl.mu, lvl.dropped), p)
                )
        analysis_measured = max(parts)
        analysis_bound = 2.0 * lp_norm(f0, base_mu, p)
    else:
        acc = pyr.apex_base_mass * lp_norm(pyr.apex, pyr.apex_mu, p) ** p
        for lvl in pyr.levels:
            if lvl.dropped.size:
                w = lvl.base_mass * float(lvl.mu[lvl.dropped].sum())
                acc += w * lp_norm(
                    lvl.detail, condition_measure(lvl.mu, lvl.dropped), p
                ) ** p
        analysis_measured = acc ** (1.0 / p)
        two = 2.0 ** (1.0 / pstar) if pstar != math.inf else 1.0
        analysis_bound = two * (1 + n_levels) ** (1.0 / p) * lp_norm(f0, base_mu, p)

    # cascade bound on ||f - approximation||: detail contributions pushed
    # through the approximation lifts, with intertwining defects feeding
    # the roughness term
    a_sum = 0.0
    b_sum = 0.0
    defect_acc = 0.0
    prod = 1.0
    for j, lvl in enumerate(pyr.levels):
        term = prod * factors_d[j] / lvl.q_prime
        a_sum += term
        b_sum += term * defect_acc
        wb = lvl.network.w_max / betas[j]
        defect_acc += 2.0 * lvl.q_prime * (
            wb ** (1.0 / pstar) if pstar != math.inf else 1.0
        )
        prod *= factors_a[j]
    lf = pyr.levels[0].network.dense_L() @ f0
    gap_bound = a_sum * lp_norm(lf, base_mu, p) + b_sum * lp_norm(f0, base_mu, p)
    gap_measured = lp_norm(f0 - approximation(pyr), base_mu, p)

    return StabilityReport(
        p=p,
        levels=level_rows,
        analysis_measured=float(analysis_measured),
        analysis_bound=float(analysis_bound),
        approx_gap_measured=float(gap_measured),
        approx_gap_bound=float(gap_bound),
    )
