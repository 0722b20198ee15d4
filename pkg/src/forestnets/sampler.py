"""Sampling random rooted spanning forests by Wilson's algorithm.

The sampler runs the jump chain of the continuous-time walk: sitting at a
vertex with exit rate ``w(x)``, the walk is killed with probability
``q / (q + w(x))`` and otherwise jumps to a neighbor proportionally to the
edge weights.  Branches are grown from free vertices in ascending id order,
loop-erased through next-pointer overwriting, and grafted onto the forest:
a killed branch contributes a new root, an absorbed branch attaches to the
already-built part (or to a forced root).

Randomness is counter-based and fully reproducible: draws come from a
Philox 4x64 generator keyed by ``(seed, sample_index)``; the ``b``-th
branch of a sample reads from counter offset ``b * 2**192``, so any sample
of any batch can be regenerated independently and in parallel.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Sequence

import numpy as np
import scipy.stats

from . import oracle
from .errors import InvalidParams, InvalidStart, NumericalError
from .network import Network

_BUF = 64  # uniforms drawn per refill of a branch's buffer


def _branch_generator(seed: int, sample_index: int, branch: int) -> np.random.Generator:
    """Substream rule: Philox keyed (seed, sample), counter offset b * 2**192."""
    bg = np.random.Philox(key=[int(seed), int(sample_index)],
                          counter=[0, 0, 0, int(branch)])
    return np.random.Generator(bg)


def _jump_tables(net: Network) -> tuple[list[list[int]], list[list[float]], list[float]]:
    """Python-native per-vertex jump data (targets, cumulative probs, rates)."""
    targets, cumw, rates = net.adjacency
    return (
        [t.tolist() for t in targets],
        [c.tolist() for c in cumw],
        rates.tolist(),
    )


@dataclass
class RootedForest:
    """A sampled rooted spanning forest.

    ``parent[x]`` is the out-edge target of ``x``, or ``-1`` when ``x`` is
    a root.  Forced roots always satisfy ``parent[b] == -1``.
    """

    q: float
    forced_roots: tuple[int, ...]
    parent: np.ndarray

    @property
    def n(self) -> int:
        return self.parent.size

    @cached_property
    def roots(self) -> np.ndarray:
        return np.flatnonzero(self.parent == -1)

    @cached_property
    def edges(self) -> tuple[tuple[int, int], ...]:
        return tuple(
            (int(x), int(p)) for x, p in enumerate(self.parent) if p != -1
        )

    @cached_property
    def root_of(self) -> np.ndarray:
        """Root of the tree containing each vertex."""
        parent = self.parent
        out = np.full(self.n, -1, dtype=np.int64)
        for v in range(self.n):
            x = v
            trail = []
            while out[x] == -1 and parent[x] != -1:
                trail.append(x)
                x = int(parent[x])
            r = out[x] if out[x] != -1 else x
            out[v] = r
            for t in trail:
                out[t] = r
        return out

    @cached_property
    def partition(self) -> np.ndarray:
        """Block label per vertex; labels index the sorted root list."""
        roots = self.roots
        lookup = {int(r): i for i, r in enumerate(roots)}
        return np.asarray([lookup[int(r)] for r in self.root_of], dtype=np.int64)

    def blocks(self) -> list[np.ndarray]:
        return [np.flatnonzero(self.partition == i) for i in range(self.roots.size)]


def _check_sampling_args(net: Network, q: float, B: Sequence[int]) -> tuple[float, list[int]]:
    q = float(q)
    roots = sorted(set(int(b) for b in B))
    if len(roots) != len(list(B)):
        raise InvalidParams("duplicate vertex in forced root set")
    if roots and (roots[0] < 0 or roots[-1] >= net.n):
        raise InvalidParams(f"root ids must lie in 0..{net.n - 1}")
    if not np.isfinite(q) or q < 0:
        raise InvalidParams(f"killing rate q must be finite and >= 0, got {q}")
    if q == 0 and not roots:
        raise InvalidParams("q = 0 requires a nonempty forced root set")
    return q, roots


def _run_branch(
    start: int,
    kill: list[float],
    targets: list[list[int]],
    cumw: list[list[float]],
    in_forest: bytearray,
    nxt: list[int],
    gen: np.random.Generator,
) -> tuple[int, bool]:
    """Walk from ``start`` until killed or absorbed; returns (terminal, killed).

    Next-pointers are overwritten in place; the caller retraces them.
    """
    buf = gen.random(_BUF).tolist()
    pos = 0
    v = start
    while True:
        if pos == _BUF:
            buf = gen.random(_BUF).tolist()
            pos = 0
        u = buf[pos]
        pos += 1
        pk = kill[v]
        if u < pk:
            return v, True
        r = (u - pk) / (1.0 - pk)
        cw = cumw[v]
        i = 0
        last = len(cw) - 1
        while i < last and cw[i] <= r:
            i += 1
        y = targets[v][i]
        nxt[v] = y
        if in_forest[y]:
            return y, False
        v = y


def _wilson_parent(
    net: Network,
    q: float,
    roots: list[int],
    seed: int,
    sample_index: int,
    tables=None,
) -> list[int]:
    targets, cumw, rates = tables if tables is not None else _jump_tables(net)
    kill = [q / (q + r) for r in rates]
    n = net.n
    in_forest = bytearray(n)
    parent = [-1] * n
    for b in roots:
        in_forest[b] = 1
    nxt = [-1] * n
    branch = 0
    for x0 in range(n):
        if in_forest[x0]:
            continue
        gen = _branch_generator(seed, sample_index, branch)
        branch += 1
        terminal, killed = _run_branch(
            x0, kill, targets, cumw, in_forest, nxt, gen
        )
        v = x0
        while v != terminal:
            in_forest[v] = 1
            parent[v] = nxt[v]
            v = nxt[v]
        if killed:
            in_forest[terminal] = 1
            parent[terminal] = -1
    return parent


def wilson_sample(
    net: Network,
    q: float,
    B: Sequence[int] = (),
    *,
    seed: int,
    sample_index: int = 0,
) -> RootedForest:
    """Draw one random spanning forest with killing rate ``q`` and forced
    roots ``B``.  Identical ``(seed, sample_index)`` always reproduces the
    same forest."""
    q, roots = _check_sampling_args(net, q, B)
    parent = _wilson_parent(net, q, roots, seed, sample_index)
    return RootedForest(
        q=q,
        forced_roots=tuple(roots),
        parent=np.asarray(parent, dtype=np.int64),
    )


def loop_erased_walk(
    net: Network,
    q: float,
    start: int,
    B: Sequence[int] = (),
    *,
    seed: int,
    sample_index: int = 0,
) -> list[int]:
    """Loop erasure of one killed walk from ``start`` (the first branch of a
    Wilson sample).  The path ends inside ``B`` when absorbed, else at the
    kill position."""
    q, roots = _check_sampling_args(net, q, B)
    if not (0 <= start < net.n):
        raise InvalidParams(f"start vertex {start} outside 0..{net.n - 1}")
    if start in roots:
        raise InvalidStart(f"walk cannot start on a forced root: {start}")
    targets, cumw, rates = _jump_tables(net)
    kill = [q / (q + r) for r in rates]
    in_forest = bytearray(net.n)
    for b in roots:
        in_forest[b] = 1
    nxt = [-1] * net.n
    gen = _branch_generator(seed, sample_index, 0)
    terminal, _ = _run_branch(start, kill, targets, cumw, in_forest, nxt, gen)
    path = [start]
    v = start
    while v != terminal:
        v = nxt[v]
        path.append(v)
    return path


# ---------------------------------------------------------------------------
# batch statistics


@dataclass
class SampleStats:
    """Aggregates over a batch of forest samples."""

    n_samples: int
    root_count_hist: dict[int, int]
    root_freq: np.ndarray
    edge_freq: dict[tuple[int, int], float]
    mean_roots: float
    chi2_stat: float
    chi2_pvalue: float


def _chi2_against_law(
    hist: dict[int, int], law: oracle.RootCountLaw, n_samples: int
) -> tuple[float, float]:
    """Chi-square of an observed root-count histogram against the exact law,
    merging adjacent cells until every expected count is at least 5."""
    expected = law.pmf * n_samples
    observed = np.array(
        [hist.get(int(k), 0) for k in law.counts], dtype=float
    )
    cells: list[tuple[float, float]] = []
    acc_o, acc_e = 0.0, 0.0
    for o, e in zip(observed, expected):
        acc_o += o
        acc_e += e
        if acc_e >= 5.0:
            cells.append((acc_o, acc_e))
            acc_o, acc_e = 0.0, 0.0
    if acc_e > 0 or acc_o > 0:
        if cells:
            o0, e0 = cells[-1]
            cells[-1] = (o0 + acc_o, e0 + acc_e)
        else:
            cells.append((acc_o, acc_e))
    if len(cells) < 2:
        return 0.0, 1.0
    obs = np.array([c[0] for c in cells])
    exp = np.array([c[1] for c in cells])
    exp *= obs.sum() / exp.sum()  # remove float drift in total mass
    stat, pvalue = scipy.stats.chisquare(obs, exp)
    return float(stat), float(pvalue)


def empirical_stats(
    net: Network,
    q: float,
    B: Sequence[int] = (),
    n_samples: int = 1000,
    *,
    seed: int,
    threads: int = 1,
) -> SampleStats:
    """Sample ``n_samples`` forests and aggregate root/edge frequencies plus
    a chi-square comparison of the root-count histogram with the exact law.

    Results are independent of ``threads``: sample ``i`` always consumes the
    substream keyed ``(seed, i)``.
    """
    q, roots = _check_sampling_args(net, q, B)
    if n_samples < 1:
        raise InvalidParams("n_samples must be >= 1")
    tables = _jump_tables(net)
    n = net.n

    def run_chunk(bounds: tuple[int, int]):
        lo, hi = bounds
        # counts[x, y] = times parent of x was y; column n counts "x is root"
        counts = np.zeros((n, n + 1), dtype=np.int64)
        hist = np.zeros(n + 1, dtype=np.int64)
        for i in range(lo, hi):
            parent = _wilson_parent(net, q, roots, seed, i, tables)
            for x, p in enumerate(parent):
                counts[x, p] += 1  # p == -1 lands in column n
            hist[parent.count(-1)] += 1
        return counts, hist

    if threads > 1:
        edges = np.linspace(0, n_samples, threads + 1, dtype=int)
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(run_chunk, zip(edges[:-1], edges[1:])))
        counts = np.sum([p[0] for p in parts], axis=0)
        hist_arr = np.sum([p[1] for p in parts], axis=0)
    else:
        counts, hist_arr = run_chunk((0, n_samples))

    root_freq = counts[:, n] / n_samples
    edge_freq = {}
    for x in range(n):
        for y in np.flatnonzero(counts[x, :n]):
            edge_freq[(x, int(y))] = counts[x, y] / n_samples
    hist = {int(k): int(c) for k, c in enumerate(hist_arr) if c > 0}

    mean_roots = float(
        sum(k * c for k, c in hist.items())
    ) / n_samples
    law = oracle.root_count_law(net, q, roots)
    stat, pvalue = _chi2_against_law(hist, law, n_samples)
    return SampleStats(
        n_samples=n_samples,
        root_count_hist=hist,
        root_freq=root_freq,
        edge_freq=edge_freq,
        mean_roots=mean_roots,
        chi2_stat=stat,
        chi2_pvalue=pvalue,
    )


# ---------------------------------------------------------------------------
# prescribed number of roots


@dataclass
class MRootsResult:
    """Outcome of the feedback iteration targeting ``m`` roots."""

    forest: RootedForest
    q: float
    iterations: int
    converged: bool
    q_trace: list[float] = field(default_factory=list)


def sample_with_m_roots(
    net: Network,
    m: int,
    B: Sequence[int] = (),
    *,
    seed: int,
    q0: float | None = None,
    max_iters: int = 30,
) -> MRootsResult:
    """Iterate Wilson samples, retargeting ``q`` until the root count lands
    in the window ``m +- 2 sqrt(m)``.

    Starting from ``q0`` (default ``w_max``), each rejection rescales
    ``q <- q * m / |roots|``, clamped to ``[1e-12, 1e12] * w_max``.  If the
    window is never hit the best forest seen so far is returned with
    ``converged=False``.
    """
    _, roots = _check_sampling_args(net, 1.0, B)
    if not (max(1, len(roots)) <= m <= net.n):
        raise InvalidParams(f"target root count m={m} outside [1, {net.n}]")
    if max_iters < 1:
        raise InvalidParams("max_iters must be >= 1")
    lo = m - 2.0 * np.sqrt(m)
    hi = m + 2.0 * np.sqrt(m)
    q = float(q0) if q0 is not None else net.w_max
    if q <= 0 or not np.isfinite(q):
        raise InvalidParams("q0 must be positive and finite")

    best: RootedForest | None = None
    best_gap = np.inf
    best_q = q
    trace: list[float] = []
    for it in range(max_iters):
        trace.append(q)
        forest = wilson_sample(net, q, roots, seed=seed, sample_index=it)
        k = forest.roots.size
        gap = abs(k - m)
        if gap < best_gap:
            best, best_gap, best_q = forest, gap, q
        if lo <= k <= hi:
            return MRootsResult(
                forest=forest, q=q, iterations=it + 1,
                converged=True, q_trace=trace,
            )
        q = q * m / max(k, 1)
        q = float(np.clip(q, 1e-12 * net.w_max, 1e12 * net.w_max))
    assert best is not None
    return MRootsResult(
        forest=best, q=best_q, iterations=max_iters,
        converged=False, q_trace=trace,
    )


# ---------------------------------------------------------------------------
# conditional law of roots given the tree partition


@dataclass
class PartitionEquilibriumEntry:
    blocks: tuple[tuple[int, ...], ...]
    count: int
    max_tv: float


@dataclass
class PartitionEquilibriumReport:
    n_samples: int
    min_count: int
    entries: list[PartitionEquilibriumEntry]

    @property
    def max_tv(self) -> float:
        return max((e.max_tv for e in self.entries), default=0.0)


def restricted_equilibrium(net: Network, block: Sequence[int]) -> np.ndarray:
    """Invariant measure of the walk restricted to ``block`` (jumps leaving
    the block suppressed)."""
    idx = sorted(int(v) for v in block)
    if not idx:
        raise InvalidParams("empty block")
    k = len(idx)
    if k == 1:
        return np.array([1.0])
    sub = np.zeros((k, k))
    for i, x in enumerate(idx):
        for j, y in enumerate(idx):
            if i != j:
                sub[i, j] = net.weight(x, y)
    sub -= np.diag(sub.sum(axis=1))
    a = np.vstack([sub.T, np.ones(k)])
    b = np.zeros(k + 1)
    b[-1] = 1.0
    mu, *_ = np.linalg.lstsq(a, b, rcond=None)
    if mu.min() < -1e-10:
        raise NumericalError("restricted equilibrium came out negative")
    mu = np.clip(mu, 0.0, None)
    return mu / mu.sum()


def conditional_root_equilibrium_check(
    net: Network,
    q: float,
    n_samples: int,
    *,
    seed: int,
    min_count: int = 100,
) -> PartitionEquilibriumReport:
    """Empirical check that, conditionally on the tree partition, each
    block's root follows the restricted-walk equilibrium of that block.

    Samples forests, groups them by induced partition, and for every
    partition observed at least ``min_count`` times compares the root
    frequency inside each block with ``restricted_equilibrium``; reports
    the worst total-variation gap per partition.
    """
    q, roots = _check_sampling_args(net, q, B=())
    tables = _jump_tables(net)
    # per partition key: [count, {block_index: {root: count}}]
    seen: dict[tuple[tuple[int, ...], ...], list] = {}
    for i in range(n_samples):
        parent = _wilson_parent(net, q, roots, seed, i, tables)
        forest = RootedForest(q=q, forced_roots=(), parent=np.asarray(parent))
        key = tuple(tuple(int(v) for v in b) for b in forest.blocks())
        rec = seen.setdefault(key, [0, {}])
        rec[0] += 1
        for bi, r in enumerate(forest.roots):
            rec[1].setdefault(bi, {})
            rec[1][bi][int(r)] = rec[1][bi].get(int(r), 0) + 1

    entries = []
    for key, (count, root_counts) in sorted(seen.items()):
        if count < min_count:
            continue
        worst = 0.0
        for bi, block in enumerate(key):
            want = restricted_equilibrium(net, block)
            got = np.array(
                [root_counts[bi].get(v, 0) for v in block], dtype=float
            )
            got /= count
            worst = max(worst, 0.5 * float(np.abs(got - want).sum()))
        entries.append(
            PartitionEquilibriumEntry(blocks=key, count=count, max_tv=worst)
        )
    return PartitionEquilibriumReport(
        n_samples=n_samples, min_count=min_count, entries=entries
    )


# ---------------------------------------------------------------------------
# Monte-Carlo tuning estimates


@dataclass
class TuningRecord:
    q: float
    w_tilde: float
    one_over_beta_tilde: float
    objective: float
    mean_roots: float


def default_q_grid(net: Network) -> list[float]:
    """Geometric grid ``w_max * 2**-k`` for ``k = 0..6``."""
    return [net.w_max * 2.0 ** (-k) for k in range(7)]


def estimate_tuning(
    net: Network,
    q_grid: Sequence[float] | None = None,
    n_samples: int = 16,
    *,
    seed: int,
    threads: int = 1,
) -> list[TuningRecord]:
    """Monte-Carlo tuning scan.

    For each candidate ``q``: ``w_tilde = q * E[|V - R| / (1 + |R|)]``
    estimates the reduced network's maximal rate, and
    ``1/beta_tilde = E[|V - R| / |R|] / w_max`` estimates the inverse
    return-speed; their product is the objective to minimize.
    """
    if q_grid is None:
        q_grid = default_q_grid(net)
    grid = [float(x) for x in q_grid]
    if any(x <= 0 or not np.isfinite(x) for x in grid):
        raise InvalidParams("q grid entries must be positive and finite")
    if n_samples < 1:
        raise InvalidParams("n_samples must be >= 1")
    tables = _jump_tables(net)
    n = net.n

    def scan(args) -> TuningRecord:
        gi, q = args
        ratio_w = 0.0
        ratio_b = 0.0
        mean_r = 0.0
        for i in range(n_samples):
            parent = _wilson_parent(
                net, q, [], seed, gi * n_samples + i, tables
            )
            k = parent.count(-1)
            ratio_w += (n - k) / (1.0 + k)
            ratio_b += (n - k) / k
            mean_r += k
        w_tilde = q * ratio_w / n_samples
        inv_beta = ratio_b / n_samples / net.w_max
        return TuningRecord(
            q=q,
            w_tilde=w_tilde,
            one_over_beta_tilde=inv_beta,
            objective=w_tilde * inv_beta,
            mean_roots=mean_r / n_samples,
        )

    jobs = list(enumerate(grid))
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(scan, jobs))
    return [scan(j) for j in jobs]
