"""Shared helpers for the test suite."""

import itertools
import math

import numpy as np

from gte.tensor import (
    CanonicalTensor,
    class_count,
    component_is_symmetric,
    multiplicities,
)


# verdict lines recorded by the acceptance tests, printed after the run
# (a summary section is immune to output capture)
ACCEPTANCE_VERDICTS: list[str] = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if ACCEPTANCE_VERDICTS:
        terminalreporter.section("acceptance verdicts")
        for line in ACCEPTANCE_VERDICTS:
            terminalreporter.write_line(line)


def random_tensor(class_tag, p, N, rng):
    """A generic member of the class with standard-normal canonical entries
    (zeroed where the class forces zeros)."""
    K = class_count(p, N)
    if class_tag == "sym":
        return CanonicalTensor("sym", p, N, {(): rng.standard_normal(K)})
    if class_tag == "antisym":
        vals = rng.standard_normal(K)
        vals[multiplicities(p, N) < math.factorial(p)] = 0.0
        return CanonicalTensor("antisym", p, N, {(): vals})
    if class_tag == "herm":
        h1 = rng.standard_normal(K)
        h1[multiplicities(p, N) < math.factorial(p)] = 0.0
        return CanonicalTensor("herm", p, N, {(0,): rng.standard_normal(K), (1,): h1})
    comps = {}
    for eps in itertools.product(range(4), repeat=p // 2):
        v = rng.standard_normal(K)
        if not component_is_symmetric(eps):
            v[multiplicities(p, N) < math.factorial(p)] = 0.0
        comps[eps] = v
    return CanonicalTensor("selfdual", p, N, comps)
