"""Forest-driven coarse-graining of networks.

Two constructions connect a network to a smaller one:

* the Schur complement of the generator onto a kept vertex set, which is
  the generator of the trace process (watch the walk only on kept
  vertices);
* link operators sending coarse vertices to probability measures on the
  fine network, intertwined (exactly or approximately) with the two
  generators.

This module provides both, plus the quality functionals coupling them:
total-variation intertwining defects of metastable kernels, Gram matrices
and the squeezing functional of a link, operator-norm intertwining
residuals with their return-speed bounds, and an error-budgeted
sparsification of reduced generators.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from . import config, oracle, sampler
from .errors import (
    EmptyBlock,
    InvalidParams,
    NumericalError,
    ZeroProbability,
)
from .network import Network, build_network, skeleton
from .norms import condition_measure, holder_conjugate, lp_norm, tv_distance


# ---------------------------------------------------------------------------
# Schur reduction (trace process)


@dataclass
class ReducedNetwork:
    """Result of reducing a network onto a kept vertex set.

    ``network`` lives on ``0..len(kept)-1``; position ``i`` corresponds to
    parent vertex ``kept[i]``.  ``mu`` is the parent's invariant measure
    conditioned on the kept set, which is also invariant for the reduced
    generator.
    """

    network: Network
    kept: np.ndarray
    parent: Network
    mu: np.ndarray

    @property
    def n(self) -> int:
        return self.network.n

    @property
    def L(self) -> np.ndarray:
        return self.network.dense_L()


def _canon_keep(net: Network, keep: Sequence[int]) -> np.ndarray:
    kept = np.asarray(sorted(set(int(v) for v in keep)), dtype=np.int64)
    if kept.size != len(list(keep)):
        raise InvalidParams("duplicate vertex in kept set")
    if kept.size == 0:
        raise InvalidParams("kept set must be nonempty")
    if kept[0] < 0 or kept[-1] >= net.n:
        raise InvalidParams(f"kept ids must lie in 0..{net.n - 1}")
    return kept


def schur_complement(net: Network, keep: Sequence[int]) -> np.ndarray:
    """Schur complement of the generator onto ``keep`` (exact, unclamped)."""
    kept = _canon_keep(net, keep)
    L = net.dense_L()
    drop = np.setdiff1d(np.arange(net.n), kept)
    if drop.size == 0:
        return L.copy()
    A = L[np.ix_(kept, kept)]
    Bm = L[np.ix_(kept, drop)]
    C = L[np.ix_(drop, kept)]
    D = L[np.ix_(drop, drop)]
    X = np.linalg.solve(D, C)
    return A - Bm @ X


def schur_reduce(net: Network, keep: Sequence[int]) -> ReducedNetwork:
    """Reduce the network onto ``keep`` by the Schur complement of ``L``.

    The result is again a generator: off-diagonal entries are clamped at
    zero when they are negative by no more than numerical noise, with the
    defect folded into the diagonal so rows still sum to zero.
    """
    kept = _canon_keep(net, keep)
    Lbar = schur_complement(net, kept)
    m = kept.size
    off = Lbar - np.diag(np.diag(Lbar))
    floor = -1e-12 * max(1.0, net.w_max)
    if off.min() < floor:
        raise NumericalError(
            f"Schur complement off-diagonal {off.min():.3e} is negative "
            "beyond clamping tolerance"
        )
    edges = [
        (i, j, float(off[i, j]))
        for i in range(m)
        for j in range(m)
        if i != j and off[i, j] > 0.0
    ]
    reduced = build_network(edges, m)
    mu_cond = condition_measure(net.mu, kept)
    if np.abs(reduced.mu - mu_cond).max() > 1e-8:
        raise NumericalError(
            "reduced invariant measure does not match the conditioned "
            "parent measure"
        )
    return ReducedNetwork(network=reduced, kept=kept, parent=net, mu=mu_cond)


# ---------------------------------------------------------------------------
# link operators


def partition_link(net: Network, blocks: Sequence[Sequence[int]]) -> np.ndarray:
    """Link operator of a partition: row ``i`` is ``mu`` conditioned on
    block ``i`` (a probability measure supported on that block)."""
    seen: set[int] = set()
    for b in blocks:
        if len(b) == 0:
            raise EmptyBlock("partition contains an empty block")
        for v in b:
            v = int(v)
            if v in seen:
                raise InvalidParams(f"vertex {v} appears in two blocks")
            if not (0 <= v < net.n):
                raise InvalidParams(f"vertex {v} outside 0..{net.n - 1}")
            seen.add(v)
    if len(seen) != net.n:
        raise EmptyBlock("partition does not cover every vertex")
    link = np.zeros((len(blocks), net.n))
    for i, b in enumerate(blocks):
        idx = np.asarray(sorted(int(v) for v in b), dtype=np.int64)
        link[i, idx] = condition_measure(net.mu, idx)
    return link


def kernel_link(net: Network, keep: Sequence[int], q_prime: float) -> np.ndarray:
    """Link operator of a kept set: row ``i`` is the killed-walk kernel
    ``K_{q'}(kept[i], .)`` on the full network (a probability measure)."""
    kept = _canon_keep(net, keep)
    if q_prime <= 0 or not np.isfinite(q_prime):
        raise InvalidParams("q' must be positive and finite")
    K = oracle.green(net, q_prime).K
    link = K[kept, :]
    rows = link.sum(axis=1)
    if np.abs(rows - 1.0).max() > config.STRUCTURAL_TOL * net.n:
        raise NumericalError("kernel link rows do not sum to 1")
    return link


def metastable_kernel(
    net: Network, blocks: Sequence[Sequence[int]], q_prime: float
) -> np.ndarray:
    """Coarse kernel of a partition: start from the block equilibrium, run
    the walk to an independent exponential time of rate ``q'``, record the
    landing block."""
    link = partition_link(net, blocks)
    if q_prime <= 0 or not np.isfinite(q_prime):
        raise InvalidParams("q' must be positive and finite")
    K = oracle.green(net, q_prime).K
    member = np.zeros((len(blocks), net.n))
    for i, b in enumerate(blocks):
        member[i, [int(v) for v in b]] = 1.0
    Pbar = link @ K @ member.T
    rows = Pbar.sum(axis=1)
    if np.abs(rows - 1.0).max() > config.STRUCTURAL_TOL * net.n:
        raise NumericalError("metastable kernel rows do not sum to 1")
    return Pbar


def intertwining_error_tv(
    net: Network, blocks: Sequence[Sequence[int]], q_prime: float
) -> np.ndarray:
    """Row-wise total variation gap between running the fine kernel after
    the link and running the coarse kernel before it."""
    link = partition_link(net, blocks)
    K = oracle.green(net, q_prime).K
    Pbar = metastable_kernel(net, blocks, q_prime)
    fine = link @ K
    coarse = Pbar @ link
    return np.asarray(
        [tv_distance(fine[i], coarse[i]) for i in range(link.shape[0])]
    )


def tv_meta_bound(
    net: Network,
    q: float,
    q_prime: float,
    p: float,
    n_walks: int = 64,
    *,
    seed: int,
) -> float:
    """Product bound on the expected total-variation intertwining defect of
    the random-partition metastable kernel:

        (E |roots at rate q|)^(1/p)
        * ( (q'/q) * sum_x E |loop-erased walk from x at rate q'| )^(1/p*)

    The mean root count is exact; mean loop-erased path lengths (edge
    counts) are Monte-Carlo estimates.
    """
    if p != math.inf and p < 1:
        raise InvalidParams("p must be >= 1 or inf")
    if q <= 0 or q_prime <= 0:
        raise InvalidParams("q and q' must be positive")
    mean_roots, _ = oracle.root_count_moments(net, q)
    total_len = 0.0
    for x in range(net.n):
        for i in range(n_walks):
            path = sampler.loop_erased_walk(
                net, q_prime, x, seed=seed, sample_index=x * n_walks + i
            )
            total_len += len(path) - 1
    mean_len_sum = total_len / n_walks
    pstar = holder_conjugate(p)
    first = mean_roots ** (1.0 / p) if p != math.inf else 1.0
    base = (q_prime / q) * mean_len_sum
    second = base ** (1.0 / pstar) if pstar != math.inf else 1.0
    return float(first * second)


# ---------------------------------------------------------------------------
# Gram matrix and squeezing


class SqueezingResult(NamedTuple):
    value: float
    singular: bool


def gram(link: np.ndarray, mu: Sequence[float]) -> np.ndarray:
    """Gram matrix of link rows under the ``1/mu``-weighted inner product."""
    link = np.asarray(link, dtype=float)
    mu = np.asarray(mu, dtype=float)
    if link.ndim != 2 or link.shape[1] != mu.size:
        raise InvalidParams("link must be (m, n) with n matching mu")
    if mu.min() <= 0:
        raise InvalidParams("mu must be strictly positive")
    g = (link / mu) @ link.T
    return 0.5 * (g + g.T)


def squeezing(link: np.ndarray, mu: Sequence[float]) -> SqueezingResult:
    """Squeezing functional ``sqrt(trace(Gram^-1))``.

    Returns ``inf`` with the ``singular`` flag when the Gram matrix is
    numerically rank deficient (linearly dependent link rows).
    """
    g = gram(link, mu)
    lam = np.linalg.eigvalsh(g)
    if lam[0] <= config.GRAM_SINGULAR_REL * max(lam[-1], 1e-300):
        return SqueezingResult(value=math.inf, singular=True)
    return SqueezingResult(value=float(np.sqrt((1.0 / lam).sum())), singular=False)


def squeezing_spectral_bound(
    net: Network, q: float, q_prime: float, m: int
) -> float:
    """Spectral upper bound for the expected squeezing of the kernel link
    on the random root set, conditioned on seeing exactly ``m`` roots.

    With ``p_j(u) = u / (u + lam_j)`` over the nonzero spectrum, set
    ``S = sum p_j(q')^2 (1 - p_j(q))^2``, ``T = sum p_j(q)^2 / p_j(q')^2``
    and ``V = sum p_j(q)(1 - p_j(q))``; the bound is

        min( sqrt(1 + sqrt(T/S)) * exp(sqrt(S T) - V),
             sqrt(1 + T) * exp((1 + S T)/2 - V) ) / P(|roots| = m).

    Requires a real spectrum (reversible network).
    """
    if not (1 <= m <= net.n):
        raise InvalidParams(f"m must lie in 1..{net.n}")
    if q <= 0 or q_prime <= 0:
        raise InvalidParams("q and q' must be positive")
    lam = oracle.spectrum(net)
    scale = max(1.0, float(np.abs(lam).max()))
    if np.abs(lam.imag).max() > 1e-9 * scale:
        raise InvalidParams(
            "spectral squeezing bound needs a real spectrum "
            "(reversible network)"
        )
    lam = np.sort(lam.real)
    if abs(lam[0]) > 1e-8 * scale:
        raise NumericalError("missing zero eigenvalue")
    lam = lam[1:]
    pq = q / (q + lam)
    pqp = q_prime / (q_prime + lam)
    s_n = float((pqp ** 2 * (1.0 - pq) ** 2).sum())
    t_n = float((pq ** 2 / pqp ** 2).sum())
    v_n = float((pq * (1.0 - pq)).sum())
    if lam.size == 0:
        numerator = 1.0
    else:
        branch2 = math.sqrt(1.0 + t_n) * math.exp((1.0 + s_n * t_n) / 2.0 - v_n)
        if s_n > 0:
            branch1 = math.sqrt(1.0 + math.sqrt(t_n / s_n)) * math.exp(
                math.sqrt(s_n * t_n) - v_n
            )
            numerator = min(branch1, branch2)
        else:
            numerator = branch2
    law = oracle.root_count_law(net, q)
    prob = float(law.pmf[np.searchsorted(law.counts, m)]) if m in law.counts else 0.0
    if prob <= 1e-300:
        raise ZeroProbability(f"P(|roots| = {m}) vanishes")
    return numerator / prob


# ---------------------------------------------------------------------------
# operator intertwining residual and return speeds


def beta_gamma(net: Network, keep: Sequence[int]) -> tuple[float, float]:
    """Return speeds toward a kept set.

    ``1/beta`` is the worst expected time to re-enter the kept set after
    one skeleton step from a kept vertex; ``1/gamma`` the worst expected
    entrance time from a dropped vertex.
    """
    kept = _canon_keep(net, keep)
    h = oracle.hitting_times(net, kept)
    P = skeleton(net)
    one_over_beta = float((P[kept, :] @ h).max())
    drop = np.setdiff1d(np.arange(net.n), kept)
    one_over_gamma = float(h[drop].max()) if drop.size else 0.0
    beta = math.inf if one_over_beta == 0.0 else 1.0 / one_over_beta
    gamma = math.inf if one_over_gamma == 0.0 else 1.0 / one_over_gamma
    return beta, gamma


@dataclass
class ResidualReport:
    p: float
    residual: float
    bound: float


def operator_intertwining_residual(
    net: Network, keep: Sequence[int], q_prime: float, p: float
) -> ResidualReport:
    """Intertwining defect of the kernel link against the Schur-reduced
    generator, with its return-speed bound.

    The defect matrix is ``M = Lbar Link - Link L``.  For finite ``p`` the
    reported residual maximizes ``norm(M f, p, kept) / norm(f, p, all)``
    over indicator functions (a documented lower bound on the true operator
    norm); for ``p = inf`` it is the exact row-sup operator norm.  The
    bound is ``2 q' (w_max / beta)^(1/p*) / mu(kept)^(1/p)``.
    """
    if p != math.inf and p < 1:
        raise InvalidParams("p must be >= 1 or inf")
    kept = _canon_keep(net, keep)
    link = kernel_link(net, kept, q_prime)
    red = schur_reduce(net, kept)
    M = red.L @ link - link @ net.dense_L()

    mu = net.mu
    mu_kept = condition_measure(mu, kept)
    if p == math.inf:
        residual = float(np.abs(M).sum(axis=1).max())
    else:
        residual = 0.0
        for z in range(net.n):
            num = lp_norm(M[:, z], mu_kept, p)
            den = mu[z] ** (1.0 / p)
            residual = max(residual, num / den)

    beta, _ = beta_gamma(net, kept)
    pstar = holder_conjugate(p)
    w_over_beta = net.w_max / beta
    factor = w_over_beta ** (1.0 / pstar) if pstar != math.inf else 1.0
    mass = float(mu[kept].sum())
    mass_factor = mass ** (-1.0 / p) if p != math.inf else 1.0
    bound = 2.0 * q_prime * factor * mass_factor
    return ResidualReport(p=p, residual=residual, bound=bound)


# ---------------------------------------------------------------------------
# sparsification


def _support_connected(w: np.ndarray) -> bool:
    m = w.shape[0]
    seen = np.zeros(m, dtype=bool)
    stack = [0]
    seen[0] = True
    while stack:
        x = stack.pop()
        for y in np.flatnonzero(w[x] > 0):
            if not seen[y]:
                seen[y] = True
                stack.append(int(y))
    return bool(seen.all())


def sparsify(
    reduction: ReducedNetwork, q_prime: float, theta: float
) -> ReducedNetwork:
    """Remove reciprocal edge pairs from a reversible reduced network while
    keeping every row of the intertwining defect within ``(1 + theta)``
    times its original sup norm.

    Candidate pairs are visited by increasing conductance
    ``mu(x) w(x, y)``; a removal is kept only if the reduced support stays
    irreducible and both touched defect rows respect the budget.  Weights
    removed from a row are folded into the diagonal, preserving zero row
    sums, reversibility and the invariant measure.
    """
    if theta < 0 or not np.isfinite(theta):
        raise InvalidParams("theta must be finite and >= 0")
    red_net = reduction.network
    if not red_net.reversible:
        raise InvalidParams("sparsification requires a reversible reduction")
    parent = reduction.parent
    kept = reduction.kept
    link = kernel_link(parent, kept, q_prime)
    Lfine = parent.dense_L()
    M0 = reduction.L @ link - link @ Lfine
    budget = (1.0 + theta) * np.abs(M0).max(axis=1)

    m = red_net.n
    W = red_net.dense_L().copy()
    np.fill_diagonal(W, 0.0)

    pairs = sorted(
        (
            (float(reduction.mu[i] * W[i, j]), i, j)
            for i in range(m)
            for j in range(i + 1, m)
            if W[i, j] > 0.0 and W[j, i] > 0.0
        ),
        key=lambda t: (t[0], t[1], t[2]),
    )

    def generator(w: np.ndarray) -> np.ndarray:
        g = w.copy()
        np.fill_diagonal(g, 0.0)
        np.fill_diagonal(g, -g.sum(axis=1))
        return g

    removed_any = False
    for _, i, j in pairs:
        wij, wji = W[i, j], W[j, i]
        if wij == 0.0 or wji == 0.0:
            continue  # might have been taken out by an earlier removal
        W[i, j] = 0.0
        W[j, i] = 0.0
        ok = _support_connected(W)
        if ok:
            Ls = generator(W)
            for row in (i, j):
                defect = Ls[row] @ link - link[row] @ Lfine
                if np.abs(defect).max() > budget[row] + 1e-15:
                    ok = False
                    break
        if ok:
            removed_any = True
        else:
            W[i, j] = wij
            W[j, i] = wji

    if not removed_any:
        return reduction
    edges = [
        (i, j, float(W[i, j]))
        for i in range(m)
        for j in range(m)
        if i != j and W[i, j] > 0.0
    ]
    sparse_net = build_network(edges, m)
    if not sparse_net.reversible:
        raise NumericalError("sparsified network lost reversibility")
    return ReducedNetwork(
        network=sparse_net, kept=kept, parent=parent, mu=reduction.mu
    )
