"""Compact matrix groups acting on symmetry-classed cubic tensors.

Flavors and their tensor classes:

* ``orthogonal``  real N x N matrices acting on real-symmetric tensors,
* ``unitary``     complex N x N matrices acting on hermitian tensors; the
                  matrix multiplies odd legs and its conjugate even legs,
* ``symplectic``  complex 2N x 2N matrices preserving the standard
                  antisymmetric form J, acting on densified self-dual
                  tensors; odd legs get U and even legs get -J U J.

The action contracts every leg:

    (U . H)[i_1 .. i_p] = sum_j H[j_1 .. j_p] prod_t M_t[j_t, i_t]

with M_t the per-leg matrix above.  It satisfies
``act(V, act(U, t)) == act(U @ V, t)``; at order 1 this is ``U.T @ h``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .tensor import CanonicalTensor, canonicalize, densify

__all__ = [
    "FLAVORS",
    "GroupElement",
    "act",
    "act_dense",
    "flavor_for_class",
    "generator_matrix",
    "givens_rotation",
    "haar_sample",
    "symplectic_form",
    "theta_derivative",
]

FLAVORS = ("orthogonal", "unitary", "symplectic")

#: Maximum deviation tolerated when validating a group element.
ORTHOGONAL_TOL = 1e-12
UNITARY_TOL = 1e-12
SYMPLECTIC_TOL = 1e-10

_CLASS_FLAVOR = {"sym": "orthogonal", "antisym": "orthogonal",
                 "herm": "unitary", "selfdual": "symplectic"}


def flavor_for_class(class_tag: str) -> str:
    """Group flavor acting on a tensor class."""
    try:
        return _CLASS_FLAVOR[class_tag]
    except KeyError:
        raise ValueError(f"no group action is defined for class {class_tag!r}")


@lru_cache(maxsize=None)
def symplectic_form(N: int) -> np.ndarray:
    """Block-diagonal antisymmetric form: N copies of [[0, -1], [1, 0]]."""
    J = np.zeros((2 * N, 2 * N))
    for k in range(N):
        J[2 * k, 2 * k + 1] = -1.0
        J[2 * k + 1, 2 * k] = 1.0
    J.setflags(write=False)
    return J


@dataclass(frozen=True)
class GroupElement:
    """A validated member of one of the three compact groups.

    ``N`` is the tensor dimension: orthogonal and unitary matrices are
    N x N, symplectic ones 2N x 2N over the complex numbers.
    """

    flavor: str
    matrix: np.ndarray

    def __post_init__(self):
        if self.flavor not in FLAVORS:
            raise ValueError(f"unknown flavor {self.flavor!r}")
        mat = np.array(self.matrix, dtype=float if self.flavor == "orthogonal" else complex)
        if mat.ndim != 2 or mat.shape[0] != mat.shape[1] or mat.shape[0] < 1:
            raise ValueError("group elements must be square matrices")
        dim = mat.shape[0]
        eye = np.eye(dim)
        if self.flavor == "orthogonal":
            err = np.max(np.abs(mat.T @ mat - eye))
            if err > ORTHOGONAL_TOL:
                raise ValueError(f"matrix is not orthogonal (deviation {err:.3e})")
        elif self.flavor == "unitary":
            err = np.max(np.abs(mat.conj().T @ mat - eye))
            if err > UNITARY_TOL:
                raise ValueError(f"matrix is not unitary (deviation {err:.3e})")
        else:
            if dim % 2:
                raise ValueError("symplectic matrices need even size")
            J = symplectic_form(dim // 2)
            err = np.max(np.abs(mat.T @ J @ mat - J))
            if err > SYMPLECTIC_TOL:
                raise ValueError(f"matrix does not preserve the form (deviation {err:.3e})")
            # Only the compact (unitary) part of the symplectic group keeps
            # the sampled densities invariant, so membership is checked too.
            uerr = np.max(np.abs(mat.conj().T @ mat - eye))
            if uerr > SYMPLECTIC_TOL:
                raise ValueError(f"symplectic matrix is not unitary (deviation {uerr:.3e})")
        mat.setflags(write=False)
        object.__setattr__(self, "matrix", mat)

    @property
    def N(self) -> int:
        size = self.matrix.shape[0]
        return size // 2 if self.flavor == "symplectic" else size


def haar_sample(flavor: str, N: int, rng: np.random.Generator) -> GroupElement:
    """Draw a Haar-distributed element.

    Orthogonal and unitary samples come from QR factorization of a Gaussian
    matrix with the diagonal sign (phase) correction that makes the
    distribution exactly uniform.  Symplectic samples orthonormalize the
    column pairs of a quaternionic Gaussian matrix inside its 2N complex
    embedding, which stays in the quaternionic subalgebra and therefore
    lands in the compact symplectic group.
    """
    if N < 1:
        raise ValueError("N must be at least 1")
    if flavor == "orthogonal":
        a = rng.standard_normal((N, N))
        q, r = np.linalg.qr(a)
        d = np.diag(r).copy()
        d[d == 0] = 1.0
        return GroupElement(flavor, q * np.sign(d))
    if flavor == "unitary":
        a = rng.standard_normal((N, N)) + 1j * rng.standard_normal((N, N))
        q, r = np.linalg.qr(a)
        d = np.diag(r).copy()
        d[d == 0] = 1.0
        return GroupElement(flavor, q * (d / np.abs(d)).conj())
    if flavor == "symplectic":
        return GroupElement(flavor, _haar_symplectic(N, rng))
    raise ValueError(f"unknown flavor {flavor!r}")


def _quaternion_embed(a, b, c, d) -> np.ndarray:
    """2N x 2N complex embedding of an N x N quaternion-coefficient matrix."""
    N = a.shape[0]
    out = np.empty((2 * N, 2 * N), dtype=complex)
    out[0::2, 0::2] = a + 1j * b
    out[0::2, 1::2] = -c - 1j * d
    out[1::2, 0::2] = c - 1j * d
    out[1::2, 1::2] = a - 1j * b
    return out


def _haar_symplectic(N: int, rng: np.random.Generator) -> np.ndarray:
    m = _quaternion_embed(*(rng.standard_normal((N, N)) for _ in range(4)))
    # Gram-Schmidt over column pairs.  Each pair is a quaternionic column;
    # coefficients Q^H P are embeddings of quaternions, so subtracting
    # Q (Q^H P) and scaling by the real norm keep the quaternionic
    # structure while orthonormalizing in C^{2N}.
    for j in range(N):
        pair = m[:, 2 * j : 2 * j + 2]
        for k in range(j):
            prev = m[:, 2 * k : 2 * k + 2]
            pair -= prev @ (prev.conj().T @ pair)
        norm_sq = (pair.conj().T @ pair)[0, 0].real
        pair /= np.sqrt(norm_sq)
    return m


def givens_rotation(theta: float, N: int, flavor: str) -> GroupElement:
    """Rotation by ``theta`` in the plane of the first two coordinates.

    The same cosine/sine block serves all three flavors; for the symplectic
    flavor it sits in the first quaternionic coordinate pair of the 2N
    embedding (identity cos(theta) minus the second quaternion unit times
    sin(theta)) and the matrix has size 2N.
    """
    if flavor not in FLAVORS:
        raise ValueError(f"unknown flavor {flavor!r}")
    size = 2 * N if flavor == "symplectic" else N
    if size < 2:
        raise ValueError("plane rotations need two coordinates")
    c, s = np.cos(theta), np.sin(theta)
    mat = np.eye(size)
    mat[0, 0] = c
    mat[0, 1] = s
    mat[1, 0] = -s
    mat[1, 1] = c
    return GroupElement(flavor, mat)


def generator_matrix(N: int, flavor: str = "orthogonal") -> np.ndarray:
    """Derivative of the plane-rotation family at theta = 0.

    Returns A = (d U_theta^T / d theta) U_theta evaluated at any theta,
    which is the constant antisymmetric matrix with A[0, 1] = -1 and
    A[1, 0] = 1 (size 2N for the symplectic flavor).
    """
    if flavor not in FLAVORS:
        raise ValueError(f"unknown flavor {flavor!r}")
    size = 2 * N if flavor == "symplectic" else N
    if size < 2:
        raise ValueError("plane rotations need two coordinates")
    out = np.zeros((size, size))
    out[0, 1] = -1.0
    out[1, 0] = 1.0
    return out


def _leg_matrices(g: GroupElement, p: int) -> list[np.ndarray]:
    U = g.matrix
    if g.flavor == "orthogonal":
        return [U] * p
    if g.flavor == "unitary":
        return [U if t % 2 == 0 else U.conj() for t in range(p)]
    J = symplectic_form(g.N)
    even = -J @ U @ J
    return [U if t % 2 == 0 else even for t in range(p)]


def act_dense(g: GroupElement, t: CanonicalTensor | np.ndarray, p: int | None = None) -> np.ndarray:
    """The action on the ambient tensor space, as a dense array.

    Always well defined: the per-leg contraction makes sense for any tensor
    of the right dimension, whether or not it lies in one of the symmetry
    classes.  Trace invariants with parity-matched edges are exactly
    invariant under this map (every edge contracts U against its conjugate,
    which telescopes to an identity), so the invariance machinery uses this
    entry point; ``act`` is the class-preserving wrapper.
    """
    if isinstance(t, CanonicalTensor):
        p = t.p
        dense = densify(t)
    else:
        dense = np.asarray(t)
        if p is None:
            p = dense.ndim
    if p == 0:
        return dense
    dim = g.matrix.shape[0]
    if dense.shape != (dim,) * p:
        raise ValueError(f"expected a tensor of shape {(dim,) * p}, got {dense.shape}")
    for mat in _leg_matrices(g, p):
        # Contracting axis 0 and appending the new axis keeps the legs in
        # order once all p contractions have run.
        dense = np.tensordot(dense, mat, axes=([0], [0]))
    return dense


def act(g: GroupElement, t: CanonicalTensor, *, atol: float = 1e-12) -> CanonicalTensor:
    """Apply a group element to a tensor of the matching class.

    The result is canonicalized with the class check enabled, so an action
    that moves the tensor out of its symmetry class surfaces as a
    :class:`~gte.tensor.ClassViolationError` instead of silently corrupted
    storage.  (The orthogonal action preserves its class for every p; the
    unitary and symplectic ones are only class-preserving at p = 2, where
    the tensors are matrices -- use :func:`act_dense` beyond that.)
    """
    if flavor_for_class(t.class_tag) != g.flavor:
        raise ValueError(f"flavor {g.flavor!r} does not act on class {t.class_tag!r}")
    if g.N != t.N:
        raise ValueError(f"dimension mismatch: element has N={g.N}, tensor N={t.N}")
    return canonicalize(act_dense(g, t), t.class_tag, atol=atol)


def theta_derivative(t: CanonicalTensor) -> CanonicalTensor:
    """Derivative of theta -> act(givens_rotation(theta), t) at theta = 0.

    For a real-symmetric tensor this is the sum over legs of the generator
    matrix applied to that leg.
    """
    if t.class_tag != "sym":
        raise ValueError("theta_derivative expects a real-symmetric tensor")
    if t.N < 2:
        raise ValueError("plane rotations need N >= 2")
    A = generator_matrix(t.N)
    dense = densify(t)
    out = np.zeros_like(dense)
    for leg in range(t.p):
        term = np.tensordot(dense, A, axes=([leg], [1]))
        out += np.moveaxis(term, -1, leg)
    return canonicalize(out, "sym")
