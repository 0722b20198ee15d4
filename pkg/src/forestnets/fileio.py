"""File formats: edge lists, signals, forests, images, pyramid archives.

All writers produce deterministic byte streams (stable ordering, shortest
round-trip float representation) so identical inputs yield identical
output files.
"""

from __future__ import annotations

import json
from typing import IO, Sequence

import numpy as np

from .errors import MalformedInput
from .network import Network, build_network
from .norms import condition_measure
from .sampler import RootedForest
from .wavelets import Pyramid, PyramidLevel

PYRAMID_FORMAT = "forestnets-pyramid"
PYRAMID_VERSION = 1


def _fmt(x: float) -> str:
    return repr(float(x))


# ---------------------------------------------------------------------------
# edge lists


def read_edges(fh: IO[str], undirected: bool = False) -> list[tuple[int, int, float]]:
    """Parse tab-separated ``src dst weight`` lines.

    ``#`` starts a comment and blank lines are skipped.  With
    ``undirected`` every line also adds the reversed edge.
    """
    edges: list[tuple[int, int, float]] = []
    for lineno, raw in enumerate(fh, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split("\t") if "\t" in line else line.split()
        if len(parts) != 3:
            raise MalformedInput(
                f"line {lineno}: expected 'src<TAB>dst<TAB>weight', got {raw!r}"
            )
        try:
            src, dst, w = int(parts[0]), int(parts[1]), float(parts[2])
        except ValueError as exc:
            raise MalformedInput(f"line {lineno}: {exc}") from None
        edges.append((src, dst, w))
        if undirected:
            edges.append((dst, src, w))
    if not edges:
        raise MalformedInput("edge list is empty")
    return edges


def read_network(fh: IO[str], undirected: bool = False) -> Network:
    return build_network(read_edges(fh, undirected))


def write_edges(fh: IO[str], net: Network) -> None:
    for (src, dst), w in sorted(net.edge_weights.items()):
        fh.write(f"{src}\t{dst}\t{_fmt(w)}\n")


# ---------------------------------------------------------------------------
# signals


def read_signal(fh: IO[str], n: int | None = None) -> np.ndarray:
    """Parse ``vertex,value`` lines into a dense vector.

    Every vertex ``0..n-1`` must appear exactly once; ``n`` defaults to
    the largest id seen plus one.  A leading ``vertex,value`` header and
    ``#`` comments are tolerated.
    """
    seen: dict[int, float] = {}
    for lineno, raw in enumerate(fh, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if lineno == 1 and line.lower().replace(" ", "") == "vertex,value":
            continue
        parts = line.split(",")
        if len(parts) != 2:
            raise MalformedInput(f"line {lineno}: expected 'vertex,value'")
        try:
            v, val = int(parts[0]), float(parts[1])
        except ValueError as exc:
            raise MalformedInput(f"line {lineno}: {exc}") from None
        if v in seen:
            raise MalformedInput(f"line {lineno}: vertex {v} listed twice")
        seen[v] = val
    if not seen:
        raise MalformedInput("signal file is empty")
    if n is None:
        n = max(seen) + 1
    values = np.empty(n)
    for v in range(n):
        if v not in seen:
            raise MalformedInput(f"vertex {v} missing from signal")
        values[v] = seen[v]
    if len(seen) != n:
        raise MalformedInput("signal mentions vertices outside the network")
    return values


def write_signal(fh: IO[str], values: Sequence[float]) -> None:
    fh.write("vertex,value\n")
    for v, val in enumerate(values):
        fh.write(f"{v},{_fmt(val)}\n")


# ---------------------------------------------------------------------------
# forests


def write_forest(fh: IO[str], forest: RootedForest) -> None:
    """One ``vertex<TAB>parent`` line per vertex, ``-1`` marking roots."""
    fh.write(f"# q={_fmt(forest.q)} roots={forest.roots.size}\n")
    for v, parent in enumerate(forest.parent):
        fh.write(f"{v}\t{int(parent)}\n")


def read_forest(fh: IO[str]) -> tuple[np.ndarray, float | None]:
    """Inverse of :func:`write_forest`: (parent array, q if recorded)."""
    q: float | None = None
    entries: dict[int, int] = {}
    for lineno, raw in enumerate(fh, start=1):
        line = raw.strip()
        if line.startswith("#"):
            for tok in line[1:].split():
                if tok.startswith("q="):
                    try:
                        q = float(tok[2:])
                    except ValueError:
                        raise MalformedInput(f"line {lineno}: bad q value")
            continue
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2:
            raise MalformedInput(f"line {lineno}: expected 'vertex<TAB>parent'")
        try:
            entries[int(parts[0])] = int(parts[1])
        except ValueError as exc:
            raise MalformedInput(f"line {lineno}: {exc}") from None
    if not entries:
        raise MalformedInput("forest file is empty")
    n = max(entries) + 1
    parent = np.full(n, -2, dtype=np.int64)
    for v, p in entries.items():
        parent[v] = p
    if (parent == -2).any():
        raise MalformedInput("forest file skips a vertex")
    return parent, q


# ---------------------------------------------------------------------------
# portable graymap images


def read_pgm(fh: IO[bytes]) -> tuple[np.ndarray, int]:
    """Read a P2 (ASCII) or P5 (binary) graymap.

    Returns (rows x cols float array, maxval).
    """
    data = fh.read()
    if data[:2] not in (b"P2", b"P5"):
        raise MalformedInput("not a P2/P5 graymap")
    binary = data[:2] == b"P5"

    # header tokens: magic, width, height, maxval, with '#' comments
    tokens: list[bytes] = []
    pos = 2
    while len(tokens) < 3:
        while pos < len(data) and data[pos : pos + 1].isspace():
            pos += 1
        if pos < len(data) and data[pos : pos + 1] == b"#":
            while pos < len(data) and data[pos : pos + 1] != b"\n":
                pos += 1
            continue
        start = pos
        while pos < len(data) and not data[pos : pos + 1].isspace():
            pos += 1
        if start == pos:
            raise MalformedInput("truncated graymap header")
        tokens.append(data[start:pos])
    try:
        width, height, maxval = (int(t) for t in tokens)
    except ValueError:
        raise MalformedInput("malformed graymap header") from None
    if width <= 0 or height <= 0 or not (0 < maxval < 65536):
        raise MalformedInput("invalid graymap dimensions")

    if binary:
        pos += 1  # single whitespace byte after maxval
        if maxval > 255:
            raise MalformedInput("16-bit binary graymaps are not supported")
        raster = np.frombuffer(data, dtype=np.uint8, offset=pos)
        if raster.size < width * height:
            raise MalformedInput("graymap raster is truncated")
        pixels = raster[: width * height].astype(float)
    else:
        try:
            values = [int(t) for t in data[pos:].split()]
        except ValueError:
            raise MalformedInput("non-numeric graymap raster") from None
        if len(values) < width * height:
            raise MalformedInput("graymap raster is truncated")
        pixels = np.asarray(values[: width * height], dtype=float)
    if pixels.max(initial=0.0) > maxval:
        raise MalformedInput("pixel value exceeds maxval")
    return pixels.reshape(height, width), maxval


def write_pgm(fh: IO[bytes], image: np.ndarray, maxval: int = 255) -> None:
    """Write an ASCII (P2) graymap, clipping and rounding values."""
    img = np.asarray(image, dtype=float)
    if img.ndim != 2:
        raise MalformedInput("image must be a 2-d array")
    pixels = np.clip(np.rint(img), 0, maxval).astype(int)
    rows, cols = pixels.shape
    fh.write(f"P2\n{cols} {rows}\n{maxval}\n".encode())
    for r in range(rows):
        fh.write((" ".join(str(v) for v in pixels[r]) + "\n").encode())


def grid_network(rows: int, cols: int, weight: float = 1.0) -> Network:
    """Four-neighbor grid in row-major vertex order."""
    edges = []
    for r in range(rows):
        for c in range(cols):
            v = r * cols + c
            if c + 1 < cols:
                edges.append((v, v + 1, weight))
                edges.append((v + 1, v, weight))
            if r + 1 < rows:
                edges.append((v, v + cols, weight))
                edges.append((v + cols, v, weight))
    return build_network(edges, rows * cols)


# ---------------------------------------------------------------------------
# pyramid archives


def pyramid_to_dict(pyr: Pyramid, meta: dict | None = None) -> dict:
    doc = {
        "format": PYRAMID_FORMAT,
        "version": PYRAMID_VERSION,
        "seed": pyr.seed,
        "base": {
            "n": pyr.base.n,
            "edges": [
                [s, d, w] for (s, d), w in sorted(pyr.base.edge_weights.items())
            ],
        },
        "levels": [
            {
                "keep": [int(v) for v in lvl.keep],
                "q_prime": lvl.q_prime,
                "q_tuning": lvl.q_tuning,
                "detail": [float(x) for x in lvl.detail],
                "next_edges": [
                    [s, d, w]
                    for (s, d), w in sorted(lvl.next_network.edge_weights.items())
                ],
            }
            for lvl in pyr.levels
        ],
        "apex": [float(x) for x in pyr.apex],
    }
    if meta:
        doc["meta"] = meta
    return doc


def write_pyramid(fh: IO[str], pyr: Pyramid, meta: dict | None = None) -> None:
    json.dump(pyramid_to_dict(pyr, meta), fh, sort_keys=True, indent=2)
    fh.write("\n")


def read_pyramid(fh: IO[str]) -> tuple[Pyramid, dict]:
    """Inverse of :func:`write_pyramid`: (pyramid, metadata dict)."""
    try:
        doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise MalformedInput(f"invalid pyramid JSON: {exc}") from None
    if not isinstance(doc, dict) or doc.get("format") != PYRAMID_FORMAT:
        raise MalformedInput("not a pyramid archive")
    if doc.get("version") != PYRAMID_VERSION:
        raise MalformedInput(f"unsupported pyramid version {doc.get('version')}")
    try:
        base = build_network(
            [(int(s), int(d), float(w)) for s, d, w in doc["base"]["edges"]],
            int(doc["base"]["n"]),
        )
        levels: list[PyramidLevel] = []
        current = base
        mu = base.mu.copy()
        mass = 1.0
        for entry in doc["levels"]:
            keep = np.asarray(sorted(int(v) for v in entry["keep"]), dtype=np.int64)
            dropped = np.setdiff1d(np.arange(current.n), keep)
            next_edges = [
                (int(s), int(d), float(w)) for s, d, w in entry["next_edges"]
            ]
            next_net = build_network(next_edges, keep.size)
            detail = np.asarray([float(x) for x in entry["detail"]])
            if detail.size != dropped.size:
                raise MalformedInput("detail length does not match dropped set")
            levels.append(
                PyramidLevel(
                    network=current,
                    mu=mu,
                    base_mass=mass,
                    keep=keep,
                    dropped=dropped,
                    q_prime=float(entry["q_prime"]),
                    detail=detail,
                    next_network=next_net,
                    q_tuning=(
                        None
                        if entry.get("q_tuning") is None
                        else float(entry["q_tuning"])
                    ),
                )
            )
            mass *= float(mu[keep].sum())
            mu = condition_measure(mu, keep)
            current = next_net
        apex = np.asarray([float(x) for x in doc["apex"]])
        if apex.size != current.n:
            raise MalformedInput("apex length does not match final network")
    except (KeyError, TypeError, ValueError) as exc:
        raise MalformedInput(f"malformed pyramid archive: {exc}") from None
    pyr = Pyramid(
        base=base,
        levels=levels,
        apex=apex,
        apex_mu=mu,
        apex_base_mass=mass,
        seed=doc.get("seed"),
    )
    return pyr, doc.get("meta", {})
