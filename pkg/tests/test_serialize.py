"""JSON wire formats: tensors, group elements, trace graphs."""

import json

import numpy as np
import pytest

from conftest import random_tensor
from gte.groups import haar_sample
from gte.invariants import TraceGraph, melon_graph
from gte.serialize import (
    dumps_graph,
    dumps_matrix,
    dumps_tensor,
    graph_from_dict,
    graph_to_dict,
    load_tensor,
    loads_graph,
    loads_matrix,
    loads_tensor,
    matrix_from_dict,
    matrix_to_dict,
    save_tensor,
    tensor_from_dict,
    tensor_to_dict,
)
from gte.tensor import identity_tensor, zeros


@pytest.mark.parametrize("class_tag,p,N", [
    ("sym", 3, 2), ("antisym", 3, 3), ("herm", 2, 3), ("herm", 4, 2),
    ("selfdual", 2, 2), ("selfdual", 6, 1),
])
def test_tensor_round_trip(class_tag, p, N):
    rng = np.random.default_rng(0)
    t = random_tensor(class_tag, p, N, rng)
    back = loads_tensor(dumps_tensor(t))
    assert back.class_tag == t.class_tag and (back.p, back.N) == (t.p, t.N)
    for key in t.data:
        assert np.array_equal(back.component(key), t.component(key))


def test_tensor_json_structure_one_based_and_sparse():
    d = tensor_to_dict(identity_tensor(4, 2))
    assert d["class"] == "sym" and d["p"] == 4 and d["N"] == 2
    entries = {tuple(e["idx"]): e["re"] for e in d["entries"]}
    # 1-based sorted index classes; zero entries omitted
    assert entries[(1, 1, 2, 2)] == pytest.approx(1.0 / 6.0)
    assert entries[(1, 1, 1, 1)] == 1.0
    assert (1, 1, 1, 2) not in entries
    for e in d["entries"]:
        assert list(e["idx"]) == sorted(e["idx"])
        assert "im" not in e  # real class never writes an imaginary part


def test_zero_tensor_serializes_to_empty_entries():
    d = tensor_to_dict(zeros("herm", 2, 2))
    assert d["entries"] == []
    t = tensor_from_dict(d)
    assert np.array_equal(t.component((0,)), np.zeros(3))


def test_tensor_dict_validation():
    with pytest.raises((ValueError, KeyError)):
        tensor_from_dict({"class": "sym", "p": 2, "N": 2,
                          "entries": [{"idx": [2, 1], "re": 1.0}]})  # unsorted
    with pytest.raises((ValueError, KeyError)):
        tensor_from_dict({"class": "wat", "p": 2, "N": 2, "entries": []})
    with pytest.raises((ValueError, KeyError)):
        tensor_from_dict({"class": "sym", "p": 2, "N": 2,
                          "entries": [{"idx": [1, 1], "re": 0.0, "im": 2.0}]})
    with pytest.raises((ValueError, KeyError)):
        tensor_from_dict({"class": "selfdual", "p": 2, "N": 2,
                          "entries": [{"idx": [1, 1], "re": 1.0, "eps": [7]}]})


def test_tensor_file_round_trip(tmp_path):
    rng = np.random.default_rng(1)
    t = random_tensor("herm", 4, 2, rng)
    path = tmp_path / "t.json"
    save_tensor(t, path)
    text = path.read_text()
    assert text.endswith("\n") and "\n" not in text[:-1]  # single line
    back = load_tensor(path)
    assert np.array_equal(back.component((1,)), t.component((1,)))


def test_matrix_round_trip_all_flavors():
    rng = np.random.default_rng(2)
    for flavor, N in [("orthogonal", 3), ("unitary", 2), ("symplectic", 2)]:
        g = haar_sample(flavor, N, rng)
        back = loads_matrix(dumps_matrix(g))
        assert back.flavor == flavor
        assert np.allclose(back.matrix, g.matrix, atol=1e-15)


def test_matrix_json_structure():
    rng = np.random.default_rng(3)
    d = matrix_to_dict(haar_sample("unitary", 2, rng))
    assert d["flavor"] == "unitary" and d["N"] == 2
    assert len(d["rows"]) == 2 and len(d["rows"][0]) == 2
    assert len(d["rows"][0][0]) == 2  # [re, im] pairs
    with pytest.raises((ValueError, KeyError)):
        matrix_from_dict({"flavor": "unitary", "N": 2,
                          "rows": [[[1, 0], [0, 0]], [[0, 0], [2, 0]]]})


def test_graph_round_trip_and_structure():
    g = melon_graph(4, "hermitian")
    d = graph_to_dict(g)
    assert d["flavor"] == "parity"
    # vertices stay 0-based, positions 1-based
    flat = [pos for edge in d["edges"] for (_, pos) in edge]
    assert min(flat) == 1 and max(flat) == 4
    verts = [v for edge in d["edges"] for (v, _) in edge]
    assert min(verts) == 0
    back = graph_from_dict(d)
    assert back == g
    assert loads_graph(dumps_graph(g)) == g


def test_json_is_strict():
    # output must parse as standard JSON (no NaN/Infinity)
    rng = np.random.default_rng(4)
    t = random_tensor("selfdual", 2, 2, rng)
    json.loads(dumps_tensor(t))
    g = melon_graph(2)
    json.loads(dumps_graph(g))
