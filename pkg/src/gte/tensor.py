"""Symmetry-classed cubic tensors stored one value per canonical index class.

Storage model
-------------
A cubic tensor of order ``p`` and dimension ``N`` assigns a value to each of
the ``N**p`` index tuples.  Every symmetry class handled here is determined
by its values on the *canonical* tuples, the non-decreasing ones, of which
there are ``binom(N + p - 1, p)``.  The supported classes are

``sym``
    one real payload; the dense entry at any tuple equals the entry at the
    sorted tuple.
``antisym``
    one real payload; the dense entry is the entry at the sorted tuple times
    the sign of the sorting permutation, and vanishes whenever an index
    repeats.
``herm``
    a symmetric payload (real part) plus an antisymmetric payload
    (imaginary part); ``p`` must be even.
``selfdual``
    a map from length ``p/2`` tuples over ``{0, 1, 2, 3}`` to real payloads,
    one per product of quaternion basis matrices; the component payload is
    symmetric when the tuple has an even number of nonzero slots and
    antisymmetric otherwise.  ``p % 4 == 2`` is required and the dense form
    lives in dimension ``2N``.

Indices are 0-based throughout this module.  The 1-based convention of the
file formats is applied by the serializer and nowhere else.
"""

from __future__ import annotations

import itertools
import math
from collections import Counter
from dataclasses import dataclass
from functools import lru_cache
from types import MappingProxyType
from typing import Iterable, Mapping

import numpy as np

__all__ = [
    "CLASS_TAGS",
    "QUATERNION_UNITS",
    "CanonicalTensor",
    "ClassViolationError",
    "MultiIndex",
    "canonical_indices",
    "canonicalize",
    "class_count",
    "component_is_symmetric",
    "densify",
    "flatten_isometry",
    "frobenius_norm_sq",
    "identity_tensor",
    "is_paired",
    "lead_component_key",
    "multiplicities",
    "multiplicity",
    "paired_half_multiplicities",
    "paired_mask",
    "shifted_by_identity",
    "sort_with_sign",
    "unflatten_isometry",
    "zeros",
]

CLASS_TAGS = ("sym", "antisym", "herm", "selfdual")

#: Quaternion basis in its 2x2 complex representation.  Index 0 is the
#: identity; 1, 2, 3 square to minus the identity and anticommute.
QUATERNION_UNITS = np.array(
    [
        [[1.0, 0.0], [0.0, 1.0]],
        [[1.0j, 0.0], [0.0, -1.0j]],
        [[0.0, -1.0], [1.0, 0.0]],
        [[0.0, -1.0j], [-1.0j, 0.0]],
    ]
)
QUATERNION_UNITS.setflags(write=False)


class ClassViolationError(ValueError):
    """Raised when a dense array fails its claimed symmetry class.

    ``pair`` holds the first offending pair of index tuples (0-based); the
    message renders them 1-based to match the documented convention.
    """

    def __init__(self, message: str, pair: tuple[tuple[int, ...], tuple[int, ...]]):
        super().__init__(message)
        self.pair = pair


def multiplicity(indices: Iterable[int]) -> int:
    """Number of distinct permutations of an index tuple, p! / prod(c_j!)."""
    tup = tuple(indices)
    out = math.factorial(len(tup))
    for c in Counter(tup).values():
        out //= math.factorial(c)
    return out


def is_paired(indices: Iterable[int]) -> bool:
    """True when the tuple is a permutation of (j1, j1, ..., j_{p/2}, j_{p/2}).

    Equivalently, every index value occurs an even number of times; always
    False for odd order.
    """
    tup = tuple(indices)
    if len(tup) % 2:
        return False
    return all(c % 2 == 0 for c in Counter(tup).values())


def sort_with_sign(indices: Iterable[int]) -> tuple[tuple[int, ...], int]:
    """Sorted tuple and the sign of the sorting permutation (0 on repeats)."""
    tup = tuple(indices)
    srt = tuple(sorted(tup))
    if len(set(tup)) < len(tup):
        return srt, 0
    inversions = sum(
        1
        for a in range(len(tup))
        for b in range(a + 1, len(tup))
        if tup[a] > tup[b]
    )
    return srt, -1 if inversions % 2 else 1


@lru_cache(maxsize=None)
def canonical_indices(p: int, N: int) -> tuple[tuple[int, ...], ...]:
    """All non-decreasing index tuples of length p over range(N), lex order."""
    return tuple(itertools.combinations_with_replacement(range(N), p))


def class_count(p: int, N: int) -> int:
    """Number of canonical index classes, binom(N + p - 1, p)."""
    return math.comb(N + p - 1, p)


@lru_cache(maxsize=None)
def _class_positions(p: int, N: int) -> Mapping[tuple[int, ...], int]:
    return MappingProxyType(
        {m: pos for pos, m in enumerate(canonical_indices(p, N))}
    )


@lru_cache(maxsize=None)
def multiplicities(p: int, N: int) -> np.ndarray:
    """Vector of class multiplicities in canonical order (read-only)."""
    out = np.array([multiplicity(m) for m in canonical_indices(p, N)], dtype=float)
    out.setflags(write=False)
    return out


@lru_cache(maxsize=None)
def paired_mask(p: int, N: int) -> np.ndarray:
    """Boolean vector marking the paired canonical classes (read-only)."""
    out = np.array([is_paired(m) for m in canonical_indices(p, N)])
    out.setflags(write=False)
    return out


@lru_cache(maxsize=None)
def _repeated_mask(p: int, N: int) -> np.ndarray:
    out = np.array([len(set(m)) < len(m) for m in canonical_indices(p, N)])
    out.setflags(write=False)
    return out


@lru_cache(maxsize=None)
def paired_half_multiplicities(p: int, N: int) -> np.ndarray:
    """Per class: multiplicity of the half tuple for paired classes, else 0.

    The half tuple of a paired class keeps each index value half as often.
    Its multiplicity counts the ways (i_1, ..., i_{p/2}) can enumerate the
    class as (i_1, i_1, ..., i_{p/2}, i_{p/2}), which is what a trace over
    repeated index pairs sums.
    """
    vals = []
    for m in canonical_indices(p, N):
        if is_paired(m):
            half = tuple(
                itertools.chain.from_iterable(
                    [j] * (c // 2) for j, c in sorted(Counter(m).items())
                )
            )
            vals.append(multiplicity(half))
        else:
            vals.append(0)
    out = np.array(vals, dtype=float)
    out.setflags(write=False)
    return out


@lru_cache(maxsize=None)
def _dense_tables(p: int, N: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Lookup tables between dense positions and canonical classes.

    Returns ``(cls, sgn, rep)`` where ``cls[flat]`` is the canonical class
    of the flat dense position, ``sgn[flat]`` the sign of the sorting
    permutation (0 on repeated indices) and ``rep[k]`` the flat dense
    position of class k's representative tuple.
    """
    positions = _class_positions(p, N)
    total = N**p
    cls = np.empty(total, dtype=np.int64)
    sgn = np.empty(total, dtype=np.int8)
    for flat, tup in enumerate(itertools.product(range(N), repeat=p)):
        srt, s = sort_with_sign(tup)
        cls[flat] = positions[srt]
        sgn[flat] = s
    rep = np.array(
        [np.ravel_multi_index(m, (N,) * p) for m in canonical_indices(p, N)],
        dtype=np.int64,
    )
    for arr in (cls, sgn, rep):
        arr.setflags(write=False)
    return cls, sgn, rep


def component_is_symmetric(eps: tuple[int, ...]) -> bool:
    """Symmetry type of a self-dual quaternion component.

    A component is symmetric exactly when its label has an even number of
    nonzero slots; otherwise it is antisymmetric.
    """
    return sum(1 for k in eps if k != 0) % 2 == 0


def lead_component_key(class_tag: str, p: int) -> tuple[int, ...]:
    """Key of the component that carries the identity direction."""
    if class_tag in ("sym", "antisym"):
        return ()
    if class_tag == "herm":
        return (0,)
    if class_tag == "selfdual":
        return (0,) * (p // 2)
    raise ValueError(f"unknown class tag {class_tag!r}")


@dataclass(frozen=True)
class MultiIndex:
    """A validated index tuple of a cubic tensor (0-based entries)."""

    indices: tuple[int, ...]
    dim: int

    def __post_init__(self):
        object.__setattr__(self, "indices", tuple(int(i) for i in self.indices))
        if self.order < 1:
            raise ValueError("order must be at least 1")
        if self.dim < 1:
            raise ValueError("dim must be at least 1")
        for i in self.indices:
            if not 0 <= i < self.dim:
                raise ValueError(f"index {i} outside [0, {self.dim})")

    @property
    def order(self) -> int:
        return len(self.indices)

    def canonical(self) -> tuple[int, ...]:
        return tuple(sorted(self.indices))

    def multiplicity(self) -> int:
        return multiplicity(self.indices)

    def is_paired(self) -> bool:
        return is_paired(self.indices)


def _component_keys(class_tag: str, p: int) -> tuple[tuple[int, ...], ...]:
    if class_tag in ("sym", "antisym"):
        return ((),)
    if class_tag == "herm":
        return ((0,), (1,))
    return tuple(itertools.product(range(4), repeat=p // 2))


def _key_is_symmetric(class_tag: str, key: tuple[int, ...]) -> bool:
    if class_tag == "sym":
        return True
    if class_tag == "antisym":
        return False
    if class_tag == "herm":
        return key == (0,)
    return component_is_symmetric(key)


@dataclass(frozen=True)
class CanonicalTensor:
    """Immutable tensor in canonical-class storage.

    ``data`` maps component keys to read-only float vectors of length
    ``class_count(p, N)`` in canonical order.  Component keys are ``()`` for
    the real classes, ``(0,)`` / ``(1,)`` for the hermitian real and
    imaginary parts, and quaternion labels for the self-dual class.  Missing
    self-dual components are zero.
    """

    class_tag: str
    p: int
    N: int
    data: Mapping[tuple[int, ...], np.ndarray]

    def __post_init__(self):
        if self.class_tag not in CLASS_TAGS:
            raise ValueError(f"unknown class tag {self.class_tag!r}")
        if self.p < 1 or self.N < 1:
            raise ValueError("p and N must be at least 1")
        if self.class_tag == "herm" and self.p % 2:
            raise ValueError("hermitian tensors require even order")
        if self.class_tag == "selfdual" and self.p % 4 != 2:
            raise ValueError("self-dual tensors require order 2 mod 4")
        K = class_count(self.p, self.N)
        allowed = set(_component_keys(self.class_tag, self.p))
        clean: dict[tuple[int, ...], np.ndarray] = {}
        for key, vals in dict(self.data).items():
            key = tuple(int(k) for k in key)
            if key not in allowed:
                raise ValueError(f"component {key!r} invalid for {self.class_tag}")
            arr = np.asarray(vals, dtype=float).copy()
            if arr.shape != (K,):
                raise ValueError(f"component {key!r} must have shape ({K},)")
            if not _key_is_symmetric(self.class_tag, key):
                bad = _repeated_mask(self.p, self.N) & (arr != 0.0)
                if bad.any():
                    m = canonical_indices(self.p, self.N)[int(np.argmax(bad))]
                    raise ValueError(
                        "antisymmetric component has a nonzero value on the "
                        f"repeated-index class {tuple(i + 1 for i in m)} (1-based)"
                    )
            arr.setflags(write=False)
            clean[key] = arr
        if self.class_tag in ("sym", "antisym") and () not in clean:
            clean[()] = _zero_vector(K)
        if self.class_tag == "herm":
            for key in ((0,), (1,)):
                clean.setdefault(key, _zero_vector(K))
        object.__setattr__(self, "data", MappingProxyType(clean))

    # -- convenience ----------------------------------------------------

    @property
    def K(self) -> int:
        return class_count(self.p, self.N)

    def component(self, key: tuple[int, ...]) -> np.ndarray:
        """Component vector for ``key``; zeros when the component is absent."""
        key = tuple(int(k) for k in key)
        if key not in set(_component_keys(self.class_tag, self.p)):
            raise KeyError(f"component {key!r} invalid for {self.class_tag}")
        got = self.data.get(key)
        return got if got is not None else _zero_vector(self.K)

    @property
    def values(self) -> np.ndarray:
        """Payload of a single-component (sym or antisym) tensor."""
        if self.class_tag not in ("sym", "antisym"):
            raise AttributeError("values is defined for sym and antisym only")
        return self.data[()]

    def entry(self, indices: Iterable[int]):
        """Dense entry at an index tuple (length p; 2N-dimensional for
        self-dual tensors, N-dimensional otherwise)."""
        tup = tuple(int(i) for i in indices)
        dim = 2 * self.N if self.class_tag == "selfdual" else self.N
        if len(tup) != self.p:
            raise ValueError(f"expected {self.p} indices, got {len(tup)}")
        MultiIndex(tup, dim)  # bounds check
        if self.class_tag == "selfdual":
            flat = int(np.ravel_multi_index(tup, (dim,) * self.p))
            return complex(densify(self).reshape(-1)[flat])
        srt, sign = sort_with_sign(tup)
        pos = _class_positions(self.p, self.N)[srt]
        if self.class_tag == "sym":
            return float(self.data[()][pos])
        if self.class_tag == "antisym":
            return float(sign * self.data[()][pos])
        re = self.data[(0,)][pos]
        im = sign * self.data[(1,)][pos]
        return complex(re, im)

    def map_components(self, fn) -> "CanonicalTensor":
        return CanonicalTensor(
            self.class_tag,
            self.p,
            self.N,
            {key: fn(vals) for key, vals in self.data.items()},
        )

    def __add__(self, other: "CanonicalTensor") -> "CanonicalTensor":
        self._check_compatible(other)
        keys = set(self.data) | set(other.data)
        return CanonicalTensor(
            self.class_tag,
            self.p,
            self.N,
            {k: self.component(k) + other.component(k) for k in keys},
        )

    def __sub__(self, other: "CanonicalTensor") -> "CanonicalTensor":
        return self + other * (-1.0)

    def __mul__(self, scalar: float) -> "CanonicalTensor":
        return self.map_components(lambda v: v * float(scalar))

    __rmul__ = __mul__

    def _check_compatible(self, other: "CanonicalTensor") -> None:
        if (self.class_tag, self.p, self.N) != (other.class_tag, other.p, other.N):
            raise ValueError("tensors differ in class, order, or dimension")


def _zero_vector(K: int) -> np.ndarray:
    out = np.zeros(K)
    out.setflags(write=False)
    return out


def zeros(class_tag: str, p: int, N: int) -> CanonicalTensor:
    """The zero tensor of a given class."""
    return CanonicalTensor(class_tag, p, N, {})


def identity_tensor(p: int, N: int) -> CanonicalTensor:
    """Symmetric tensor with entry 1/multiplicity on paired classes.

    Zero for odd order.  At order 2 this is the identity matrix.
    """
    if p < 1 or N < 1:
        raise ValueError("p and N must be at least 1")
    if p % 2:
        return zeros("sym", p, N)
    vals = np.where(paired_mask(p, N), 1.0 / multiplicities(p, N), 0.0)
    return CanonicalTensor("sym", p, N, {(): vals})


def shifted_by_identity(t: CanonicalTensor, coeff: float) -> CanonicalTensor:
    """Add ``coeff`` times the identity tensor to the lead component."""
    coeff = float(coeff)
    if coeff == 0.0:
        return t
    if t.class_tag == "antisym":
        raise ValueError("antisymmetric tensors admit no identity shift")
    ident = identity_tensor(t.p, t.N).values
    key = lead_component_key(t.class_tag, t.p)
    shifted = dict(t.data)
    shifted[key] = t.component(key) + coeff * ident
    return CanonicalTensor(t.class_tag, t.p, t.N, shifted)


# -- dense conversion ----------------------------------------------------


def _dense_real(p: int, N: int, vals: np.ndarray, symmetric: bool) -> np.ndarray:
    cls, sgn, _ = _dense_tables(p, N)
    flat = vals[cls] if symmetric else vals[cls] * sgn
    return flat.reshape((N,) * p)


def _interleaved_subscripts(p: int) -> tuple[list[int], list[int]]:
    """Einsum axis labels used to weave component and quaternion axes.

    Component axes are labeled ``0..p-1`` and the quaternion axis of leg t
    is ``p + t``; slot s couples legs 2s and 2s + 1.  The interleaved output
    order is (i_0, iota_0, i_1, iota_1, ...).
    """
    component_axes = list(range(p))
    interleaved = []
    for t in range(p):
        interleaved += [t, p + t]
    return component_axes, interleaved


def densify(t: CanonicalTensor) -> np.ndarray:
    """Dense ndarray form: real for sym/antisym, complex for herm/selfdual.

    Self-dual tensors densify to dimension 2N; each leg index splits as
    ``2 * i + iota`` with ``i`` the component index and ``iota`` the row or
    column of the quaternion factor.
    """
    if t.class_tag == "sym":
        return _dense_real(t.p, t.N, t.data[()], True)
    if t.class_tag == "antisym":
        return _dense_real(t.p, t.N, t.data[()], False)
    if t.class_tag == "herm":
        return _dense_real(t.p, t.N, t.data[(0,)], True) + 1j * _dense_real(
            t.p, t.N, t.data[(1,)], False
        )
    p, N = t.p, t.N
    component_axes, interleaved = _interleaved_subscripts(p)
    out = np.zeros((N, 2) * p, dtype=complex)
    for eps, vals in t.data.items():
        comp = _dense_real(p, N, vals, component_is_symmetric(eps)).astype(complex)
        operands: list = [comp, component_axes]
        for s, k in enumerate(eps):
            operands += [QUATERNION_UNITS[k], [p + 2 * s, p + 2 * s + 1]]
        out += np.einsum(*operands, interleaved)
    return out.reshape((2 * N,) * p)


def frobenius_norm_sq(t) -> float:
    """Squared Frobenius norm: sum of |entry|^2 over all dense positions.

    For self-dual tensors the dense form lives in dimension 2N and every
    quaternion basis matrix contributes squared Hilbert-Schmidt norm 2, so
    the component sum carries a factor 2**(p/2).
    """
    if isinstance(t, np.ndarray):
        return float(np.sum(np.abs(t) ** 2))
    gam = multiplicities(t.p, t.N)
    scale = 2.0 ** (t.p // 2) if t.class_tag == "selfdual" else 1.0
    return float(scale * sum(np.sum(gam * vals**2) for vals in t.data.values()))


def flatten_isometry(t: CanonicalTensor) -> np.ndarray:
    """Norm-preserving flattening of a symmetric tensor.

    Each canonical value is scaled by the square root of its class
    multiplicity, so the Euclidean norm of the result matches the tensor's
    Frobenius norm.
    """
    if t.class_tag != "sym":
        raise ValueError("flatten_isometry expects a real-symmetric tensor")
    return np.sqrt(multiplicities(t.p, t.N)) * t.data[()]


def unflatten_isometry(vec: np.ndarray, p: int, N: int) -> CanonicalTensor:
    """Inverse of :func:`flatten_isometry`."""
    vec = np.asarray(vec, dtype=float)
    K = class_count(p, N)
    if vec.shape != (K,):
        raise ValueError(f"expected a vector of length {K}")
    return CanonicalTensor("sym", p, N, {(): vec / np.sqrt(multiplicities(p, N))})


# -- canonicalization ----------------------------------------------------


def canonicalize(
    dense: np.ndarray,
    class_tag: str,
    *,
    project: bool = False,
    atol: float = 1e-12,
) -> CanonicalTensor:
    """Recover canonical storage from a dense array.

    Without ``project`` the array must satisfy its class symmetry within the
    absolute tolerance; a :class:`ClassViolationError` naming the first
    offending index pair is raised otherwise.  With ``project`` the class
    part is taken by averaging and no check is performed.
    """
    dense = np.asarray(dense)
    if dense.ndim < 1:
        raise ValueError("expected at least one axis")
    D = dense.shape[0]
    if dense.shape != (D,) * dense.ndim:
        raise ValueError("expected equal axis lengths")
    p = dense.ndim
    if class_tag in ("sym", "antisym"):
        values = _extract_real(dense, class_tag, p, D, project, atol, "")
        return CanonicalTensor(class_tag, p, D, {(): values})
    if class_tag == "herm":
        dense = dense.astype(complex)
        re = _extract_real(dense.real, "sym", p, D, project, atol, "real part: ")
        im = _extract_real(
            dense.imag, "antisym", p, D, project, atol, "imaginary part: "
        )
        return CanonicalTensor("herm", p, D, {(0,): re, (1,): im})
    if class_tag != "selfdual":
        raise ValueError(f"unknown class tag {class_tag!r}")
    if D % 2:
        raise ValueError("self-dual dense arrays need even dimension")
    return _canonicalize_selfdual(dense.astype(complex), p, D // 2, project, atol)


def _extract_real(
    dense: np.ndarray,
    class_tag: str,
    p: int,
    N: int,
    project: bool,
    atol: float,
    label: str,
) -> np.ndarray:
    if np.iscomplexobj(dense):
        raise ValueError("real classes expect real dense arrays")
    flat = np.asarray(dense, dtype=float).reshape(-1)
    cls, sgn, rep = _dense_tables(p, N)
    gam = multiplicities(p, N)
    if project:
        weights = flat if class_tag == "sym" else flat * sgn
        values = np.bincount(cls, weights=weights, minlength=len(gam)) / gam
        if class_tag == "antisym":
            values = np.where(_repeated_mask(p, N), 0.0, values)
        return values
    values = flat[rep]
    if class_tag == "antisym":
        values = np.where(_repeated_mask(p, N), 0.0, values)
        recon = values[cls] * sgn
    else:
        recon = values[cls]
    diff = np.abs(flat - recon)
    worst = int(np.argmax(diff))
    if diff[worst] > atol:
        bad = tuple(int(i) for i in np.unravel_index(worst, (N,) * p))
        partner = tuple(sorted(bad))
        raise ClassViolationError(
            f"{label}entry at {tuple(i + 1 for i in bad)} deviates from the "
            f"value implied by {tuple(i + 1 for i in partner)} "
            f"by {diff[worst]:.3e} (indices 1-based)",
            (bad, partner),
        )
    return values


def _extract_selfdual_components(
    dense: np.ndarray, p: int, N: int
) -> dict[tuple[int, ...], np.ndarray]:
    """Complex quaternion components of a dense 2N-dimensional array.

    Uses the trace orthogonality of the quaternion basis: each basis matrix
    has squared Hilbert-Schmidt norm 2, so every slot contributes a factor
    of 1/2 after pairing with the conjugated basis.
    """
    half = p // 2
    interleaved = dense.reshape((N, 2) * p)
    component_axes, inter_axes = _interleaved_subscripts(p)
    comps = {}
    for eps in itertools.product(range(4), repeat=half):
        operands: list = [interleaved, inter_axes]
        for s, k in enumerate(eps):
            operands += [np.conj(QUATERNION_UNITS[k]), [p + 2 * s, p + 2 * s + 1]]
        comps[eps] = np.einsum(*operands, component_axes) / 2.0**half
    return comps


def _canonicalize_selfdual(
    dense: np.ndarray, p: int, N: int, project: bool, atol: float
) -> CanonicalTensor:
    cls, sgn, rep = _dense_tables(p, N)
    gam = multiplicities(p, N)
    repeated = _repeated_mask(p, N)
    raw = _extract_selfdual_components(dense, p, N)
    data = {}
    for eps, comp in raw.items():
        flat = comp.reshape(-1)
        symmetric = component_is_symmetric(eps)
        if project:
            weights = flat.real if symmetric else flat.real * sgn
            vals = np.bincount(cls, weights=weights, minlength=len(gam)) / gam
            if not symmetric:
                vals = np.where(repeated, 0.0, vals)
        else:
            vals = flat[rep].real
            if not symmetric:
                vals = np.where(repeated, 0.0, vals)
        if np.any(vals != 0.0):
            data[eps] = vals
    out = CanonicalTensor("selfdual", p, N, data)
    if not project:
        recon = densify(out)
        diff = np.abs(dense - recon.reshape(dense.shape))
        worst = int(np.argmax(diff))
        if diff.reshape(-1)[worst] > atol:
            bad = tuple(int(i) for i in np.unravel_index(worst, dense.shape))
            half_sorted = tuple(sorted(i // 2 for i in bad))
            raise ClassViolationError(
                f"entry at {tuple(i + 1 for i in bad)} is incompatible with "
                "the quaternion component structure implied by the class "
                f"{tuple(i + 1 for i in half_sorted)} (indices 1-based, "
                f"deviation {diff.reshape(-1)[worst]:.3e})",
                (bad, half_sorted),
            )
    return out
