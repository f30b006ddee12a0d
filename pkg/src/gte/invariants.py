"""Trace invariants of symmetric/hermitian/self-dual tensors.

A trace invariant is encoded by a p-regular multigraph on n vertices, given
as a perfect matching on the n*p "slots" (vertex, position).  Every vertex
carries a copy of the tensor; every edge carries a summation index shared by
its two slots; the invariant is the sum over all index assignments of the
product of tensor entries.

Two flavors:

* ``real``    any perfect matching; invariant under the orthogonal action,
* ``parity``  every edge joins an odd position to an even one; invariant
              under the unitary and symplectic actions (each edge then
              contracts U against its conjugate, which telescopes away).

Vertices are numbered from 0, positions from 1 (so "odd position" means
k in {1, 3, ...}).
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from itertools import product

import numpy as np

from .tensor import CanonicalTensor, densify, paired_half_multiplicities

__all__ = [
    "TraceGraph",
    "are_isomorphic",
    "bouquet_graph",
    "direct_sum",
    "enumerate_rank2",
    "evaluate",
    "melon_graph",
    "paired_trace",
    "validate",
]

Slot = tuple[int, int]
Edge = tuple[Slot, Slot]

#: tensor classes each graph flavor may be evaluated on
_FLAVOR_CLASSES = {"real": ("sym", "antisym"), "parity": ("herm", "selfdual")}


@dataclass(frozen=True)
class TraceGraph:
    """p-regular multigraph as a perfect matching on (vertex, position) slots."""

    p: int
    n: int
    flavor: str
    edges: tuple[Edge, ...]

    def __post_init__(self):
        if self.flavor not in ("real", "parity"):
            raise ValueError(f"unknown graph flavor {self.flavor!r}")
        norm = tuple(sorted(tuple(sorted((tuple(a), tuple(b))))
                            for a, b in self.edges))
        object.__setattr__(self, "edges", norm)

    @property
    def rank(self) -> int:
        return self.n

    def is_connected(self) -> bool:
        """Whether the multigraph is connected (self-loops do not connect)."""
        if self.n <= 1:
            return True
        parent = list(range(self.n))

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for (v, _), (w, _) in self.edges:
            parent[find(v)] = find(w)
        return len({find(v) for v in range(self.n)}) == 1


def validate(g: TraceGraph) -> list[str]:
    """Check the perfect-matching and parity conditions.

    Returns a list of human-readable violations; an empty list means the
    graph is a valid trace-invariant diagram.  Connectivity is *not* a
    validity condition (disconnected graphs encode products of invariants);
    query it with ``g.is_connected()``.
    """
    out = []
    if g.p < 1 or g.n < 1:
        out.append("p and n must be positive")
        return out
    if (g.n * g.p) % 2:
        out.append(f"n*p = {g.n * g.p} is odd, no perfect matching exists")
    seen: dict[Slot, int] = {}
    for a, b in g.edges:
        for v, k in (a, b):
            if not (0 <= v < g.n):
                out.append(f"vertex {v} out of range 0..{g.n - 1}")
            elif not (1 <= k <= g.p):
                out.append(f"position {k} at vertex {v} out of range 1..{g.p}")
            else:
                seen[(v, k)] = seen.get((v, k), 0) + 1
        if a == b:
            out.append(f"slot {a} matched with itself")
        if g.flavor == "parity" and (a[1] + b[1]) % 2 == 0:
            out.append(f"parity: edge {a}-{b} joins positions of equal parity")
    for slot, cnt in seen.items():
        if cnt > 1:
            out.append(f"slot reuse: {slot} appears in {cnt} edges")
    missing = g.n * g.p - len(seen)
    if not out and missing:
        out.append(f"{missing} slots are unmatched")
    elif not out and len(g.edges) != g.n * g.p // 2:
        out.append(f"expected {g.n * g.p // 2} edges, got {len(g.edges)}")
    return out


def melon_graph(p: int, flavor: str = "real") -> TraceGraph:
    """Two vertices joined by all p edges; evaluates to the squared
    Frobenius norm on tensors of the matching class.

    ``flavor`` selects the matching convention: ``real`` joins equal
    positions, ``hermitian`` joins position t to t+1 cyclically, and
    ``selfdual`` swaps the two positions within each consecutive pair.
    The latter two produce parity graphs and need p even.
    """
    if p < 1:
        raise ValueError("p must be positive")
    if flavor == "real":
        edges = tuple(((0, t), (1, t)) for t in range(1, p + 1))
        return TraceGraph(p, 2, "real", edges)
    if p % 2:
        raise ValueError(f"{flavor} melon needs p even")
    if flavor == "hermitian":
        edges = tuple(((0, t), (1, t % p + 1)) for t in range(1, p + 1))
    elif flavor == "selfdual":
        edges = tuple(((0, 2 * t - 1), (1, 2 * t)) for t in range(1, p // 2 + 1))
        edges += tuple(((0, 2 * t), (1, 2 * t - 1)) for t in range(1, p // 2 + 1))
    else:
        raise ValueError(f"unknown melon flavor {flavor!r}")
    return TraceGraph(p, 2, "parity", edges)


def bouquet_graph(p: int, flavor: str = "real") -> TraceGraph:
    """One vertex, p/2 self-loops pairing positions (2t-1, 2t); needs p even.

    Each loop joins an odd position to an even one, so the same matching is
    valid for both flavors; evaluates to the paired trace.
    """
    if p < 2 or p % 2:
        raise ValueError("bouquet needs p even and positive")
    edges = tuple(((0, 2 * t - 1), (0, 2 * t)) for t in range(1, p // 2 + 1))
    return TraceGraph(p, 1, flavor, edges)


def enumerate_rank2(p: int, flavor: str = "real") -> list[TraceGraph]:
    """All connected two-vertex trace invariants up to slot relabeling.

    With r cross edges each vertex is left with (p-r)/2 self-loops, and any
    two matchings with the same r are related by relabeling positions within
    the vertices, so there is one representative per admissible r:
    r in {p, p-2, ..., >= 1} for the real flavor.  For the parity flavor a
    counting argument forces r to be even (each vertex must pair leftover
    odd positions with leftover even ones, and exactly r/2 cross edges leave
    from odd positions), so r in {p, p-2, ..., 2}.
    """
    if p < 1:
        raise ValueError("p must be positive")
    if flavor == "real":
        out = []
        for r in range(p, 0, -2):
            edges = [((0, t), (1, t)) for t in range(1, r + 1)]
            for v in (0, 1):
                edges += [((v, r + 2 * s - 1), (v, r + 2 * s))
                          for s in range(1, (p - r) // 2 + 1)]
            out.append(TraceGraph(p, 2, "real", tuple(edges)))
        return out
    if flavor != "parity":
        raise ValueError(f"unknown graph flavor {flavor!r}")
    if p % 2:
        raise ValueError("parity graphs need p even")
    out = []
    for r in range(p, 0, -2):
        # r/2 edges odd(u) -> even(v) and r/2 edges even(u) -> odd(v)
        edges = [((0, 2 * s - 1), (1, 2 * s)) for s in range(1, r // 2 + 1)]
        edges += [((0, 2 * s), (1, 2 * s - 1)) for s in range(1, r // 2 + 1)]
        for v in (0, 1):
            edges += [((v, r + 2 * s - 1), (v, r + 2 * s))
                      for s in range(1, (p - r) // 2 + 1)]
        out.append(TraceGraph(p, 2, "parity", tuple(edges)))
    return out


def are_isomorphic(g1: TraceGraph, g2: TraceGraph) -> bool:
    """Exact isomorphism test for graphs of rank <= 2.

    Two diagrams are isomorphic when some relabeling of vertices and of
    positions within each vertex maps one matching onto the other; parity
    graphs only admit parity-preserving position relabelings.  Exhaustive
    over the at most 2 * (p!)^2 candidates, which is fine at rank <= 2 and
    the small p in scope.
    """
    if (g1.p, g1.n, g1.flavor) != (g2.p, g2.n, g2.flavor):
        return False
    if g1.n > 2:
        raise ValueError("isomorphism test implemented for rank <= 2 only")
    if g1.edges == g2.edges:
        return True
    p = g1.p
    if g1.flavor == "parity":
        odd = list(range(1, p + 1, 2))
        even = list(range(2, p + 1, 2))
        pos_maps = []
        for po in _perms(odd):
            for pe in _perms(even):
                m = dict(zip(odd, po)) | dict(zip(even, pe))
                pos_maps.append(m)
    else:
        pos_maps = [dict(zip(range(1, p + 1), pm)) for pm in _perms(list(range(1, p + 1)))]
    verts = [list(range(g1.n))] if g1.n == 1 else [[0, 1], [1, 0]]
    target = set(g2.edges)
    for vmap in verts:
        # position relabelings are independent per vertex; match vertex 0
        # first to prune, then vertex 1
        for m0 in pos_maps:
            maps = {0: m0}
            if g1.n == 1:
                if _relabel(g1.edges, vmap, maps) == target:
                    return True
                continue
            for m1 in pos_maps:
                maps[1] = m1
                if _relabel(g1.edges, vmap, maps) == target:
                    return True
    return False


def _perms(items):
    from itertools import permutations
    return permutations(items)


def _relabel(edges, vmap, pos_maps):
    out = set()
    for (v, k), (w, l) in edges:
        a = (vmap[v], pos_maps[v][k])
        b = (vmap[w], pos_maps[w][l])
        out.add(tuple(sorted((a, b))))
    return out


def _check_compatible(g: TraceGraph, t) -> np.ndarray:
    bad = validate(g)
    if bad:
        raise ValueError("invalid graph: " + "; ".join(bad))
    if isinstance(t, CanonicalTensor):
        if t.class_tag not in _FLAVOR_CLASSES[g.flavor]:
            raise ValueError(
                f"{g.flavor} graphs evaluate on classes {_FLAVOR_CLASSES[g.flavor]}, "
                f"got {t.class_tag!r}")
        if t.p != g.p:
            raise ValueError(f"graph order {g.p} != tensor order {t.p}")
        return densify(t)
    dense = np.asarray(t)
    if dense.ndim != g.p:
        raise ValueError(f"graph order {g.p} != tensor order {dense.ndim}")
    return dense


def _slot_labels(g: TraceGraph) -> list[list[int]]:
    """Edge id carried by each (vertex, position), as labels[v][k-1]."""
    labels = [[-1] * g.p for _ in range(g.n)]
    for eid, ((v, k), (w, l)) in enumerate(g.edges):
        labels[v][k - 1] = eid
        labels[w][l - 1] = eid
    return labels


@lru_cache(maxsize=None)
def _plan(g: TraceGraph, dim: int) -> tuple[str, tuple[tuple[int, int], ...]]:
    """Contraction plan: ('dp'|'greedy', merge steps over node ids).

    Node ids 0..n-1 are the (self-loop-traced) vertices; each merge step
    (a, b) combines two live nodes into a fresh id n, n+1, ...  Exact
    subset dynamic programming when n <= 6, greedy otherwise: merge the
    pair sharing the most edges, ties broken by smaller resulting rank,
    then lexicographically.
    """
    labels = _slot_labels(g)
    free = []
    for v in range(g.n):
        lab = labels[v]
        free.append(frozenset(e for e in lab if lab.count(e) == 1))
    if g.n == 1:
        return ("dp", ())
    if g.n <= 6:
        return ("dp", _plan_dp(free, dim))
    return ("greedy", _plan_greedy(free, dim))


def _plan_dp(free: list[frozenset], dim: int) -> tuple[tuple[int, int], ...]:
    n = len(free)
    full = (1 << n) - 1

    def freeset(mask):
        s = frozenset()
        for v in range(n):
            if mask >> v & 1:
                s = s ^ free[v]          # labels interior to mask cancel
        return s

    fs = {1 << v: free[v] for v in range(n)}
    best: dict[int, tuple[float, int]] = {1 << v: (0.0, 0) for v in range(n)}
    order = sorted(range(1, full + 1), key=lambda m: bin(m).count("1"))
    for mask in order:
        if mask in best:
            continue
        fs[mask] = freeset(mask)
        choice = None
        sub = (mask - 1) & mask
        while sub:
            rest = mask ^ sub
            if sub < rest:               # each split once
                ca, _ = best[sub]
                cb, _ = best[rest]
                step = float(dim) ** len(fs[sub] | fs[rest])
                total = ca + cb + step
                if choice is None or total < choice[0]:
                    choice = (total, sub)
            sub = (sub - 1) & mask
        best[mask] = choice

    steps = []
    next_id = [n]
    node_of = {1 << v: v for v in range(n)}

    def emit(mask):
        if mask in node_of:
            return node_of[mask]
        _, sub = best[mask]
        a = emit(sub)
        b = emit(mask ^ sub)
        steps.append((a, b))
        nid = next_id[0]
        next_id[0] += 1
        node_of[mask] = nid
        return nid

    emit(full)
    return tuple(steps)


def _plan_greedy(free: list[frozenset], dim: int) -> tuple[tuple[int, int], ...]:
    live = {v: free[v] for v in range(len(free))}
    steps = []
    nid = len(free)
    while len(live) > 1:
        ids = sorted(live)
        pick = None
        for i, a in enumerate(ids):
            for b in ids[i + 1:]:
                shared = len(live[a] & live[b])
                rank = len(live[a] ^ live[b])
                key = (-shared, rank, a, b)
                if pick is None or key < pick[0]:
                    pick = (key, a, b)
        _, a, b = pick
        steps.append((a, b))
        live[nid] = live.pop(a) ^ live.pop(b)
        nid += 1
    return tuple(steps)


def evaluate(g: TraceGraph, t):
    """Value of the trace invariant on a tensor (canonical or dense).

    The sum over one index per edge of the product of vertex entries, run
    through a planned sequence of pairwise einsum contractions (self-loops
    are partial-traced inside each vertex first).  Real-flavor results are
    checked to be real and returned as float; parity flavor returns complex.
    """
    dense = _check_compatible(g, t)
    labels = _slot_labels(g)
    nodes: dict[int, tuple[list[int], np.ndarray]] = {}
    for v in range(g.n):
        lab = labels[v]
        keep = [e for e in lab if lab.count(e) == 1]
        arr = np.einsum(dense, lab, keep) if len(keep) < g.p else dense
        nodes[v] = (keep, arr)
    _, steps = _plan(g, dense.shape[0])
    nid = g.n
    for a, b in steps:
        la, ta = nodes.pop(a)
        lb, tb = nodes.pop(b)
        out = sorted(set(la) ^ set(lb))
        nodes[nid] = (out, np.einsum(ta, la, tb, lb, out))
        nid += 1
    (_, val), = nodes.values()
    val = complex(val)
    if g.flavor == "real":
        if abs(val.imag) > 1e-10:
            raise ValueError(f"real-flavor invariant has imaginary part {val.imag:.3e}")
        return val.real
    return val


def direct_sum(g: TraceGraph, t):
    """Brute-force evaluation: explicit sum over all edge-index assignments.

    Exponential in the number of edges; the oracle the planner is tested
    against, and the fallback for graphs a plan cannot cover.
    """
    dense = _check_compatible(g, t)
    labels = _slot_labels(g)
    dim = dense.shape[0]
    total = 0.0 + 0.0j
    for assign in product(range(dim), repeat=len(g.edges)):
        term = 1.0 + 0.0j
        for v in range(g.n):
            term *= dense[tuple(assign[e] for e in labels[v])]
            if term == 0.0:
                break
        total += term
    if g.flavor == "real":
        if abs(total.imag) > 1e-10:
            raise ValueError(f"real-flavor invariant has imaginary part {total.imag:.3e}")
        return total.real
    return total


def paired_trace(t: CanonicalTensor) -> float:
    """Sum of entries at (i1,i1,...,i_{p/2},i_{p/2}); 0 for p odd.

    Equals the bouquet-graph invariant.  Computed from canonical storage:
    each paired class contributes its entry times the number of half-index
    tuples hitting it, and only the symmetric component survives (the
    antisymmetric ones vanish on paired indices; for self-dual tensors the
    2x2 units trace to 2*delta_{e0}, giving a 2^{p/2} factor on Q^(0)).
    """
    if t.p % 2:
        return 0.0
    gam_half = paired_half_multiplicities(t.p, t.N)
    if t.class_tag == "antisym":
        return 0.0
    if t.class_tag == "sym":
        vals = t.data[()]
    elif t.class_tag == "herm":
        vals = t.data[(0,)]
    else:
        vals = t.data[(0,) * (t.p // 2)] * 2.0 ** (t.p // 2)
    return float(np.sum(gam_half * vals))
