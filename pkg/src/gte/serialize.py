"""JSON round-tripping for tensors, group elements, and trace graphs.

File formats use 1-based tensor indices (as in standard index notation);
the in-memory types are 0-based.  This module is the only place where the
shift happens.  All writers are deterministic: fixed key order, canonical
entry order, shortest-round-trip floats, one JSON object per line.

Formats
-------
tensor   {"class": ..., "p": ..., "N": ..., "entries": [
             {"idx": [i1..ip], "re": x, "im": y, "eps": [e1..e_{p/2}]}, ...]}
         "im" is omitted when zero, "eps" appears for self-dual components
         only; zero entries are omitted and absent classes read back as 0.
matrix   {"flavor": ..., "N": ..., "rows": [[[re, im], ...], ...]}
graph    {"p": ..., "n": ..., "flavor": ..., "edges": [[[v, k], [w, l]], ...]}
         with vertices 0-based and positions 1-based, as in TraceGraph.
"""

from __future__ import annotations

import json

import numpy as np

from .groups import FLAVORS, GroupElement
from .invariants import TraceGraph
from .tensor import CLASS_TAGS, CanonicalTensor, canonical_indices

__all__ = [
    "dumps_graph",
    "dumps_matrix",
    "dumps_tensor",
    "graph_from_dict",
    "graph_to_dict",
    "load_graph",
    "load_matrix",
    "load_tensor",
    "loads_graph",
    "loads_matrix",
    "loads_tensor",
    "matrix_from_dict",
    "matrix_to_dict",
    "save_graph",
    "save_matrix",
    "save_tensor",
    "tensor_from_dict",
    "tensor_to_dict",
]


def _dumps(obj) -> str:
    return json.dumps(obj, separators=(", ", ": "), allow_nan=False)


def tensor_to_dict(t: CanonicalTensor) -> dict:
    entries = []
    classes = canonical_indices(t.p, t.N)
    if t.class_tag in ("sym", "antisym"):
        vals = t.data[()]
        for m, x in zip(classes, vals):
            if x != 0.0:
                entries.append({"idx": [i + 1 for i in m], "re": float(x)})
    elif t.class_tag == "herm":
        re, im = t.data[(0,)], t.data[(1,)]
        for j, m in enumerate(classes):
            if re[j] == 0.0 and im[j] == 0.0:
                continue
            e = {"idx": [i + 1 for i in m], "re": float(re[j])}
            if im[j] != 0.0:
                e["im"] = float(im[j])
            entries.append(e)
    else:
        for eps in sorted(t.data):
            vals = t.data[eps]
            for m, x in zip(classes, vals):
                if x != 0.0:
                    entries.append({"idx": [i + 1 for i in m],
                                    "re": float(x), "eps": list(eps)})
    return {"class": t.class_tag, "p": t.p, "N": t.N, "entries": entries}


def tensor_from_dict(d: dict) -> CanonicalTensor:
    try:
        tag, p, N = d["class"], d["p"], d["N"]
        raw_entries = d["entries"]
    except (KeyError, TypeError) as exc:
        raise ValueError(f"tensor object must have class/p/N/entries: missing {exc}")
    if tag not in CLASS_TAGS:
        raise ValueError(f"unknown tensor class {tag!r}")
    if not (isinstance(p, int) and isinstance(N, int) and p >= 1 and N >= 1):
        raise ValueError(f"p and N must be positive integers, got p={p!r} N={N!r}")
    classes = canonical_indices(p, N)
    pos = {m: j for j, m in enumerate(classes)}
    K = len(classes)

    if tag == "selfdual":
        data = {}
    elif tag == "herm":
        data = {(0,): np.zeros(K), (1,): np.zeros(K)}
    else:
        data = {(): np.zeros(K)}

    for e in raw_entries:
        idx = tuple(i - 1 for i in e["idx"])
        if idx not in pos:
            if tuple(sorted(idx)) in pos:
                raise ValueError(f"idx {e['idx']} is not sorted non-decreasingly")
            raise ValueError(f"idx {e['idx']} out of range for p={p}, N={N}")
        j = pos[idx]
        re = float(e.get("re", 0.0))
        im = float(e.get("im", 0.0))
        if tag == "selfdual":
            if im != 0.0:
                raise ValueError("self-dual components are real; drop the 'im' field")
            eps = tuple(e.get("eps", ()))
            if len(eps) != p // 2 or not all(v in (0, 1, 2, 3) for v in eps):
                raise ValueError(f"eps must be a length-{p // 2} tuple over 0..3, got {eps}")
            data.setdefault(eps, np.zeros(K))[j] = re
        elif tag == "herm":
            data[(0,)][j] = re
            data[(1,)][j] = im
        else:
            if im != 0.0:
                raise ValueError(f"{tag} tensors are real; drop the 'im' field")
            data[()][j] = re
    if tag == "selfdual" and not data:
        data[(0,) * (p // 2)] = np.zeros(K)
    return CanonicalTensor(tag, p, N, data)


def matrix_to_dict(g: GroupElement) -> dict:
    rows = [[[float(z.real), float(z.imag)] for z in row]
            for row in np.atleast_2d(g.matrix).astype(complex)]
    return {"flavor": g.flavor, "N": g.N, "rows": rows}


def matrix_from_dict(d: dict) -> GroupElement:
    try:
        flavor, N, rows = d["flavor"], d["N"], d["rows"]
    except (KeyError, TypeError) as exc:
        raise ValueError(f"matrix object must have flavor/N/rows: missing {exc}")
    if flavor not in FLAVORS:
        raise ValueError(f"unknown flavor {flavor!r}")
    mat = np.array([[complex(a, b) for a, b in row] for row in rows])
    size = 2 * N if flavor == "symplectic" else N
    if mat.shape != (size, size):
        raise ValueError(f"{flavor} with N={N} needs a {size}x{size} matrix, got {mat.shape}")
    if flavor == "orthogonal":
        mat = mat.real
    return GroupElement(flavor, mat)


def graph_to_dict(g: TraceGraph) -> dict:
    return {"p": g.p, "n": g.n, "flavor": g.flavor,
            "edges": [[[v, k], [w, l]] for (v, k), (w, l) in g.edges]}


def graph_from_dict(d: dict) -> TraceGraph:
    try:
        p, n, flavor, edges = d["p"], d["n"], d["flavor"], d["edges"]
    except (KeyError, TypeError) as exc:
        raise ValueError(f"graph object must have p/n/flavor/edges: missing {exc}")
    try:
        norm = tuple(((int(v), int(k)), (int(w), int(l)))
                     for (v, k), (w, l) in edges)
    except (TypeError, ValueError):
        raise ValueError("edges must be pairs of [vertex, position] pairs")
    return TraceGraph(p, n, flavor, norm)


def dumps_tensor(t: CanonicalTensor) -> str:
    return _dumps(tensor_to_dict(t))


def loads_tensor(s: str) -> CanonicalTensor:
    return tensor_from_dict(json.loads(s))


def dumps_matrix(g: GroupElement) -> str:
    return _dumps(matrix_to_dict(g))


def loads_matrix(s: str) -> GroupElement:
    return matrix_from_dict(json.loads(s))


def dumps_graph(g: TraceGraph) -> str:
    return _dumps(graph_to_dict(g))


def loads_graph(s: str) -> TraceGraph:
    return graph_from_dict(json.loads(s))


def save_tensor(t: CanonicalTensor, path) -> None:
    with open(path, "w") as fh:
        fh.write(dumps_tensor(t) + "\n")


def load_tensor(path) -> CanonicalTensor:
    with open(path) as fh:
        return loads_tensor(fh.read())


def save_matrix(g: GroupElement, path) -> None:
    with open(path, "w") as fh:
        fh.write(dumps_matrix(g) + "\n")


def load_matrix(path) -> GroupElement:
    with open(path) as fh:
        return loads_matrix(fh.read())


def save_graph(g: TraceGraph, path) -> None:
    with open(path, "w") as fh:
        fh.write(dumps_graph(g) + "\n")


def load_graph(path) -> TraceGraph:
    with open(path) as fh:
        return loads_graph(fh.read())
