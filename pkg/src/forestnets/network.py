"""Weighted directed networks viewed as continuous-time Markov generators.

A network on vertices ``0..n-1`` is a set of directed edges ``(x, y, w)``
with strictly positive weights and no self loops.  Its generator is the
matrix ``L`` with ``L(x, y) = w(x, y)`` off the diagonal and
``L(x, x) = -sum_y w(x, y)``, i.e. rows sum to zero.  All statistics in
this package (forest laws, Green's functions, coarse-graining, wavelets)
are expressed through ``L``, its invariant measure ``mu`` and the maximal
exit rate ``w_max``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np
import scipy.sparse as sp

from . import config
from .errors import (
    DenseThresholdExceeded,
    DuplicateEdge,
    InvalidParams,
    NonPositiveWeight,
    NotIrreducible,
    NumericalError,
    ShapeMismatch,
)

Edge = tuple[int, int, float]


@dataclass
class Measure:
    """A nonnegative vector over vertices, optionally normalized to mass 1."""

    values: np.ndarray
    normalized: bool

    @classmethod
    def from_values(cls, values: Sequence[float]) -> "Measure":
        v = np.asarray(values, dtype=float)
        if np.any(v < 0) or not np.all(np.isfinite(v)):
            raise InvalidParams("measure entries must be finite and >= 0")
        total = float(v.sum())
        return cls(v, abs(total - 1.0) <= config.ARITHMETIC_TOL)


@dataclass
class Signal:
    """Real values attached to the vertices of one network."""

    network: "Network"
    values: np.ndarray

    def __post_init__(self) -> None:
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (self.network.n,):
            raise ShapeMismatch(
                f"signal length {self.values.shape} does not match "
                f"vertex count {self.network.n}"
            )


class Network:
    """Irreducible weighted directed network with cached spectra-free data.

    Parameters
    ----------
    edges :
        iterable of ``(src, dst, weight)`` triples; weights must be finite
        and strictly positive, ordered pairs must be unique, no self loops.
    n :
        vertex count.  Vertex ids must lie in ``0..n-1`` and the directed
        graph must be strongly connected.
    dense_threshold :
        networks with more vertices are stored sparse; operations that
        require the dense generator then raise ``DenseThresholdExceeded``.

    Attributes
    ----------
    n : int
    edges : tuple of (int, int, float), sorted by (src, dst)
    w_max : float, maximal exit rate ``max_x -L(x, x)``
    mu : ndarray, invariant probability measure (``mu @ L == 0``)
    reversible : bool, detailed balance of ``mu`` and the weights
    """

    def __init__(
        self,
        edges: Iterable[Edge],
        n: int,
        dense_threshold: int | None = None,
    ) -> None:
        if dense_threshold is None:
            dense_threshold = config.DENSE_THRESHOLD
        if n < 1:
            raise InvalidParams("network needs at least one vertex")

        canon: list[Edge] = []
        seen: set[tuple[int, int]] = set()
        for src, dst, w in edges:
            src = int(src)
            dst = int(dst)
            w = float(w)
            if not (0 <= src < n and 0 <= dst < n):
                raise InvalidParams(f"edge ({src}, {dst}) outside 0..{n - 1}")
            if src == dst:
                raise InvalidParams(f"self loop at vertex {src} not allowed")
            if not np.isfinite(w) or w <= 0.0:
                raise NonPositiveWeight(f"edge ({src}, {dst}) has weight {w}")
            if (src, dst) in seen:
                raise DuplicateEdge(f"edge ({src}, {dst}) listed twice")
            seen.add((src, dst))
            canon.append((src, dst, w))
        canon.sort(key=lambda e: (e[0], e[1]))

        self.n = n
        self.edges: tuple[Edge, ...] = tuple(canon)
        self.is_dense = n <= dense_threshold

        self._check_irreducible()

        if self.is_dense:
            L = np.zeros((n, n))
            for src, dst, w in self.edges:
                L[src, dst] = w
            L[np.arange(n), np.arange(n)] = -L.sum(axis=1)
            self._L = L
        else:
            rows = [e[0] for e in self.edges]
            cols = [e[1] for e in self.edges]
            vals = [e[2] for e in self.edges]
            off = sp.coo_matrix((vals, (rows, cols)), shape=(n, n)).tocsr()
            diag = np.asarray(off.sum(axis=1)).ravel()
            self._L = (off - sp.diags(diag)).tocsr()

        if n == 1:
            # single vertex: null generator, trivial measure
            self.w_max = 0.0
            self.mu = np.array([1.0])
            self.reversible = True
            return

        diag = -(self._L.diagonal() if not self.is_dense else np.diag(self._L))
        self.w_max = float(diag.max())
        self.mu = self._invariant_measure()
        self.reversible = self._detailed_balance()

    # -- representation ------------------------------------------------

    @property
    def L(self):
        """Generator matrix (dense ndarray, or CSR when above threshold)."""
        return self._L

    def dense_L(self) -> np.ndarray:
        if not self.is_dense:
            raise DenseThresholdExceeded(
                f"network with {self.n} vertices is stored sparse; "
                "dense-only operation refused"
            )
        return self._L

    @cached_property
    def edge_weights(self) -> dict[tuple[int, int], float]:
        return {(s, d): w for s, d, w in self.edges}

    def weight(self, src: int, dst: int) -> float:
        """w(src, dst), zero when the edge is absent."""
        return self.edge_weights.get((src, dst), 0.0)

    @cached_property
    def adjacency(self) -> tuple[list[np.ndarray], list[np.ndarray], np.ndarray]:
        """Per-vertex jump data: (targets, cumulative jump probs, exit rates)."""
        targets: list[list[int]] = [[] for _ in range(self.n)]
        weights: list[list[float]] = [[] for _ in range(self.n)]
        for src, dst, w in self.edges:
            targets[src].append(dst)
            weights[src].append(w)
        rates = np.zeros(self.n)
        tarr: list[np.ndarray] = []
        cumw: list[np.ndarray] = []
        for x in range(self.n):
            wx = np.asarray(weights[x], dtype=float)
            rates[x] = wx.sum()
            tarr.append(np.asarray(targets[x], dtype=np.int64))
            c = np.cumsum(wx)
            cumw.append(c / c[-1])
        return tarr, cumw, rates

    # -- validation helpers --------------------------------------------

    def _check_irreducible(self) -> None:
        out: list[list[int]] = [[] for _ in range(self.n)]
        inc: list[list[int]] = [[] for _ in range(self.n)]
        for src, dst, _ in self.edges:
            out[src].append(dst)
            inc[dst].append(src)
        if self.n > 1:
            for adj, direction in ((out, "forward"), (inc, "backward")):
                seen = np.zeros(self.n, dtype=bool)
                stack = [0]
                seen[0] = True
                while stack:
                    x = stack.pop()
                    for y in adj[x]:
                        if not seen[y]:
                            seen[y] = True
                            stack.append(y)
                if not seen.all():
                    missing = int(np.flatnonzero(~seen)[0])
                    raise NotIrreducible(
                        f"vertex {missing} not {direction}-reachable from 0"
                    )

    def _invariant_measure(self) -> np.ndarray:
        if self.is_dense:
            # mu L = 0 plus the normalization row, solved in one least
            # squares problem; the system is consistent, so the residual
            # is numerical noise only.
            a = np.vstack([self._L.T, np.ones(self.n)])
            b = np.zeros(self.n + 1)
            b[-1] = 1.0
            mu, *_ = np.linalg.lstsq(a, b, rcond=None)
        else:
            mu = self._invariant_measure_power()
        if np.any(mu <= 0):
            raise NumericalError("invariant measure has nonpositive entries")
        resid = np.abs(mu @ self._L).max() if self.is_dense else np.abs(
            self._L.T @ mu
        ).max()
        if resid > config.STRUCTURAL_TOL * max(1.0, self.w_max):
            raise NumericalError(
                f"invariant measure residual {resid:.3e} above tolerance"
            )
        return mu

    def _invariant_measure_power(self) -> np.ndarray:
        # stationary row vector of the skeleton chain P = Id + L / w_max,
        # found by power iteration; adequate for the sparse regime where
        # direct factorizations are refused anyway
        diag = -self._L.diagonal()
        w_max = float(diag.max())
        mu = np.full(self.n, 1.0 / self.n)
        for _ in range(200000):
            nxt = mu + (self._L.T @ mu) / w_max
            nxt /= nxt.sum()
            if np.abs(nxt - mu).max() <= 1e-14:
                return nxt
            mu = nxt
        raise NumericalError("invariant-measure power iteration stalled")

    def _detailed_balance(self) -> bool:
        tol = config.STRUCTURAL_TOL
        for src, dst, w in self.edges:
            flow = self.mu[src] * w
            back = self.mu[dst] * self.weight(dst, src)
            if abs(flow - back) > tol * max(1.0, flow):
                return False
        return True

    # -- misc ------------------------------------------------------------

    def __repr__(self) -> str:
        return (
            f"Network(n={self.n}, edges={len(self.edges)}, "
            f"w_max={self.w_max:.6g}, reversible={self.reversible})"
        )


def build_network(
    edges: Iterable[Edge],
    n: int | None = None,
    dense_threshold: int | None = None,
) -> Network:
    """Construct and validate a Network.

    When ``n`` is omitted it is inferred as ``max vertex id + 1``.
    """
    edge_list = list(edges)
    if n is None:
        if not edge_list:
            raise InvalidParams("cannot infer vertex count from empty edge list")
        n = 1 + max(max(e[0], e[1]) for e in edge_list)
    return Network(edge_list, int(n), dense_threshold)


def skeleton(net: Network) -> np.ndarray:
    """Discrete-time jump kernel ``P = Id + L / w_max`` of the network.

    Rows are probability vectors; the diagonal holds the laziness
    ``1 - w(x) / w_max`` needed to equalize exit rates across vertices.
    """
    if net.n == 1:
        return np.array([[1.0]])
    if net.is_dense:
        P = np.eye(net.n) + net.dense_L() / net.w_max
    else:
        P = (sp.eye(net.n) + net.L / net.w_max).tocsr()
        return P
    # defensive: clamp parasitic -0.0 and verify stochasticity
    P[np.abs(P) < 1e-300] = 0.0
    rows = P.sum(axis=1)
    if np.abs(rows - 1.0).max() > config.ARITHMETIC_TOL * net.n:
        raise NumericalError("skeleton rows do not sum to 1")
    return P
