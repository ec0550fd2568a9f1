"""Weighted MaxCut instances on complete graphs.

An instance is a complete graph on ``n`` vertices with i.i.d. uniform
[0, 1] edge weights drawn from a seeded stream.  Bitstrings assign each
vertex to one side of a cut; the cut value is the total weight of edges
crossing it.  Vertex ``k`` maps to bit ``k`` of the integer basis index,
and string forms are written with vertex 0 leftmost.

Cut quality is reported as the approximation ratio r = C(x) / C(x*),
which needs the optimal cut; instances up to a configurable size are
solved by exhaustive enumeration.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import CapacityError, StateError, ValidationError
from .rng import derive_rng

DEFAULT_BRUTEFORCE_LIMIT = 24
_SCAN_CHUNK_BITS = 16


def complete_edge_list(n: int) -> list[tuple[int, int]]:
    """Vertex pairs (i, j), i < j, in lexicographic order."""
    return [(i, j) for i in range(n) for j in range(i + 1, n)]


@dataclass(frozen=True)
class OptimalCut:
    bitstring: str
    value: float


@dataclass
class WmcInstance:
    """Complete-graph weighted MaxCut instance."""

    num_vertices: int
    edges: list[tuple[int, int, float]]
    seed: int | None = None
    optimal_cut: OptimalCut | None = None

    def __post_init__(self) -> None:
        n = self.num_vertices
        if not isinstance(n, int) or n < 2:
            raise ValidationError(f"instance needs at least 2 vertices, got {n!r}")
        normalized = []
        for i, j, w in self.edges:
            i, j = int(i), int(j)
            if i == j:
                raise ValidationError(f"self-loop on vertex {i}")
            if i > j:
                i, j = j, i
            if not 0 <= i < n or not 0 <= j < n:
                raise ValidationError(f"edge ({i}, {j}) out of range for n={n}")
            w = float(w)
            if not 0.0 <= w <= 1.0 or not math.isfinite(w):
                raise ValidationError(f"edge weight {w} outside [0, 1]")
            normalized.append((i, j, w))
        normalized.sort(key=lambda e: (e[0], e[1]))
        if [(i, j) for i, j, _ in normalized] != complete_edge_list(n):
            raise ValidationError("edge set is not the complete graph on n vertices")
        self.edges = normalized
        if self.optimal_cut is not None and len(self.optimal_cut.bitstring) != n:
            raise ValidationError("optimal-cut bitstring length does not match n")

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    def total_weight(self) -> float:
        return float(sum(w for _, _, w in self.edges))

    def weight_matrix(self) -> np.ndarray:
        a = np.zeros((self.num_vertices, self.num_vertices))
        for i, j, w in self.edges:
            a[i, j] = a[j, i] = w
        return a


def generate_instance(n: int, seed: int) -> WmcInstance:
    """Draw a seeded instance; same (n, seed) always gives the same weights.

    Weights come from the "instance" stream keyed by (seed, n) and are
    assigned to edges in lexicographic order.
    """
    if not isinstance(n, int) or n < 2:
        raise ValidationError(f"instance needs at least 2 vertices, got {n!r}")
    pairs = complete_edge_list(n)
    weights = derive_rng(seed, "instance", n).random(len(pairs))
    edges = [(i, j, float(w)) for (i, j), w in zip(pairs, weights)]
    return WmcInstance(num_vertices=n, edges=edges, seed=int(seed))


# ---------------------------------------------------------------------------
# bitstring forms


def bitstring_to_index(bits: str | Sequence[int]) -> int:
    """Index of a bitstring written vertex 0 first (vertex k -> bit k)."""
    z = 0
    for k, b in enumerate(bits):
        b = int(b)
        if b not in (0, 1):
            raise ValidationError(f"bit {k} is {b!r}, expected 0 or 1")
        z |= b << k
    return z


def index_to_bitstring(z: int, n: int) -> str:
    return "".join("1" if (z >> k) & 1 else "0" for k in range(n))


def as_index(x: int | str | Sequence[int] | np.integer, n: int) -> int:
    """Normalize a bitstring in any accepted form to a basis index."""
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        z = int(x)
        if not 0 <= z < (1 << n):
            raise ValidationError(f"basis index {z} out of range for n={n}")
        return z
    if len(x) != n:
        raise ValidationError(f"bitstring of length {len(x)} does not match n={n}")
    return bitstring_to_index(x)


# ---------------------------------------------------------------------------
# cut evaluation


def cut_values(inst: WmcInstance, indices: Iterable[int] | np.ndarray) -> np.ndarray:
    """Cut values for an array of basis indices.

    Edges accumulate in lexicographic order, so repeated calls agree
    bit for bit.
    """
    z = np.asarray(indices, dtype=np.uint64)
    acc = np.zeros(z.shape)
    for i, j, w in inst.edges:
        acc += w * (((z >> np.uint64(i)) ^ (z >> np.uint64(j))) & np.uint64(1))
    return acc


def cut_value(inst: WmcInstance, x: int | str | Sequence[int]) -> float:
    """Total weight of edges cut by assignment ``x``."""
    z = as_index(x, inst.num_vertices)
    return float(cut_values(inst, np.array([z], dtype=np.uint64))[0])


def cut_values_range(inst: WmcInstance, start: int, stop: int) -> np.ndarray:
    """Cut values for the contiguous index block [start, stop).

    Uses the spin form C = W/2 - s^T A s / 4 so exhaustive scans go
    through one matrix product instead of a per-edge loop.
    """
    a = inst.weight_matrix()
    half_total = 0.5 * inst.total_weight()
    z = np.arange(start, stop, dtype=np.uint64)
    shifts = np.arange(inst.num_vertices, dtype=np.uint64)
    bits = ((z[:, None] >> shifts[None, :]) & np.uint64(1)).astype(np.float64)
    s = 1.0 - 2.0 * bits
    quad = np.einsum("ij,ij->i", s @ a, s)
    return half_total - 0.25 * quad


def optimal_cut_bruteforce(
    inst: WmcInstance,
    *,
    limit: int = DEFAULT_BRUTEFORCE_LIMIT,
    threads: int = 1,
) -> tuple[str, float]:
    """Enumerate all assignments and return (bitstring, value) of the best.

    Ties (every cut has at least its complement) resolve to the lowest
    basis index.  Refuses instances above ``limit`` vertices.
    """
    n = inst.num_vertices
    if n > limit:
        raise CapacityError(
            f"brute force limited to {limit} vertices, instance has {n}"
        )
    total = 1 << n
    chunk = 1 << min(_SCAN_CHUNK_BITS, n)
    ranges = [(lo, min(lo + chunk, total)) for lo in range(0, total, chunk)]

    def scan(bounds: tuple[int, int]) -> tuple[float, int]:
        lo, hi = bounds
        vals = cut_values_range(inst, lo, hi)
        k = int(np.argmax(vals))
        return float(vals[k]), lo + k

    if threads > 1 and len(ranges) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            candidates = list(pool.map(scan, ranges))
    else:
        candidates = [scan(r) for r in ranges]

    best_val, best_z = candidates[0]
    for val, z in candidates[1:]:
        if val > best_val or (val == best_val and z < best_z):
            best_val, best_z = val, z
    best = index_to_bitstring(best_z, n)
    return best, cut_value(inst, best)


def solve_instance(inst: WmcInstance, **kwargs) -> WmcInstance:
    """Copy of ``inst`` with the brute-force optimal cut attached."""
    bits, value = optimal_cut_bruteforce(inst, **kwargs)
    return replace(inst, optimal_cut=OptimalCut(bits, value))


# ---------------------------------------------------------------------------
# ratios


def _require_optimal(inst: WmcInstance) -> OptimalCut:
    if inst.optimal_cut is None:
        raise StateError("instance has no optimal cut; solve it first")
    return inst.optimal_cut


def _to_indices(inst: WmcInstance, samples) -> np.ndarray:
    indices = getattr(samples, "indices", None)
    if indices is not None:
        return np.asarray(indices, dtype=np.uint64)
    arr = np.asarray(samples)
    if arr.dtype.kind in "iu":
        return arr.astype(np.uint64)
    return np.array(
        [as_index(x, inst.num_vertices) for x in samples], dtype=np.uint64
    )


def shot_ratios(inst: WmcInstance, samples) -> np.ndarray:
    """Per-shot approximation ratios C(x_i) / C(x*)."""
    opt = _require_optimal(inst)
    indices = _to_indices(inst, samples)
    return cut_values(inst, indices) / opt.value


def approximation_ratio(inst: WmcInstance, samples) -> float:
    """Mean cut value of the samples divided by the optimal cut value."""
    ratios = shot_ratios(inst, samples)
    if ratios.size == 0:
        raise ValidationError("approximation ratio needs at least one sample")
    return float(ratios.mean())


def random_baseline_expectation(inst: WmcInstance) -> float:
    """Expected ratio of uniform random assignments: (W/2) / C(x*).

    Each edge is cut with probability 1/2 under uniform bits, so the
    expected cut value is half the total weight.
    """
    opt = _require_optimal(inst)
    return 0.5 * inst.total_weight() / opt.value


# ---------------------------------------------------------------------------
# serialization


def instance_to_dict(inst: WmcInstance) -> dict:
    opt = inst.optimal_cut
    return {
        "n": inst.num_vertices,
        "seed": inst.seed,
        "edges": [[i, j, w] for i, j, w in inst.edges],
        "optimal": None if opt is None else {"bitstring": opt.bitstring, "value": opt.value},
    }


def instance_from_dict(data: dict) -> WmcInstance:
    try:
        n = data["n"]
        edges = [(e[0], e[1], e[2]) for e in data["edges"]]
        opt = data.get("optimal")
    except (KeyError, TypeError, IndexError) as exc:
        raise ValidationError(f"malformed instance record: {exc}") from exc
    optimal = None
    if opt is not None:
        try:
            optimal = OptimalCut(str(opt["bitstring"]), float(opt["value"]))
        except (KeyError, TypeError, ValueError) as exc:
            raise ValidationError(f"malformed optimal-cut record: {exc}") from exc
    return WmcInstance(
        num_vertices=n, edges=edges, seed=data.get("seed"), optimal_cut=optimal
    )


def save_instance(inst: WmcInstance, path: str | Path) -> None:
    Path(path).write_text(json.dumps(instance_to_dict(inst), indent=2) + "\n")


def load_instance(path: str | Path) -> WmcInstance:
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ValidationError(f"cannot read instance file {path}: {exc}") from exc
    return instance_from_dict(data)
