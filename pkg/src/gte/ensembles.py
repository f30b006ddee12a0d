"""Gaussian tensor ensembles: GOTE (real symmetric), GUTE (hermitian),
GSTE (self-dual hermitian).

Sampling happens directly in canonical storage -- one Gaussian draw per
canonical index class and component, never by symmetrizing dense i.i.d.
entries -- so the independence-up-to-symmetry structure is exact.  The
per-class standard deviations follow from the density exponents:

    kind    density exponent               entry variance
    GOTE    -||H - bI||^2 / (2 p gamma)    gamma p / Gamma
    GUTE    -||H - bI||^2 / (p gamma)      gamma p / (2 Gamma)   per part
    GSTE    -2||H - bI||^2 / (p gamma)     gamma p / (4 Gamma)   per component

where Gamma is the multiplicity of the class.  The shift beta enters through
the identity tensor on the symmetric real component (H^(0), resp. Q^(0));
antisymmetric parts are mean zero and live only on all-distinct classes.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product

import numpy as np

from .tensor import (
    CanonicalTensor,
    class_count,
    component_is_symmetric,
    frobenius_norm_sq,
    identity_tensor,
    multiplicities,
    paired_mask,
    shifted_by_identity,
    _repeated_mask,
)

__all__ = [
    "EnsembleSpec",
    "KINDS",
    "expected_frobenius_sq",
    "log_density_unnormalized",
    "sample",
    "sample_batch",
]

KINDS = ("GOTE", "GUTE", "GSTE")

_CLASS_OF_KIND = {"GOTE": "sym", "GUTE": "herm", "GSTE": "selfdual"}
#: denominator factor in the per-entry variance gamma*p/(factor*Gamma)
_VAR_FACTOR = {"GOTE": 1.0, "GUTE": 2.0, "GSTE": 4.0}
#: kappa in the exponent -kappa * ||H - beta*I||^2 / gamma
_KAPPA = {"GOTE": lambda p: 1.0 / (2 * p),
          "GUTE": lambda p: 1.0 / p,
          "GSTE": lambda p: 2.0 / p}


@dataclass(frozen=True)
class EnsembleSpec:
    """Which ensemble to draw from, with its parameters and base seed."""

    kind: str
    p: int
    N: int
    beta: float = 0.0
    gamma: float = 1.0
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "kind", str(self.kind).upper())
        if self.kind not in KINDS:
            raise ValueError(f"kind must be one of {KINDS}, got {self.kind!r}")
        if self.p < 1 or self.N < 1:
            raise ValueError("p and N must be positive")
        if not self.gamma > 0:
            raise ValueError(f"gamma must be positive, got {self.gamma}")
        if self.kind == "GUTE" and self.p % 2:
            raise ValueError("GUTE needs p even")
        if self.kind == "GSTE" and self.p % 4 != 2:
            raise ValueError("GSTE needs p = 2 mod 4")

    @property
    def class_tag(self) -> str:
        return _CLASS_OF_KIND[self.kind]


def _sigmas(spec: EnsembleSpec) -> np.ndarray:
    gam = multiplicities(spec.p, spec.N)
    return np.sqrt(spec.gamma * spec.p / (_VAR_FACTOR[spec.kind] * gam))


def sample(spec: EnsembleSpec, rng: np.random.Generator) -> CanonicalTensor:
    """One draw.  The RNG is consumed in a fixed order (one length-K normal
    vector per component, symmetric first, then by quaternion label), so a
    given generator state always produces the same tensor.
    """
    p, N = spec.p, spec.N
    sig = _sigmas(spec)
    mean = spec.beta * identity_tensor(p, N).values
    distinct = ~_repeated_mask(p, N)
    if spec.kind == "GOTE":
        vals = mean + sig * rng.standard_normal(sig.size)
        return CanonicalTensor("sym", p, N, {(): vals})
    if spec.kind == "GUTE":
        h0 = mean + sig * rng.standard_normal(sig.size)
        h1 = np.where(distinct, sig * rng.standard_normal(sig.size), 0.0)
        return CanonicalTensor("herm", p, N, {(0,): h0, (1,): h1})
    comps = {}
    for eps in product(range(4), repeat=p // 2):
        draw = sig * rng.standard_normal(sig.size)
        if component_is_symmetric(eps):
            comps[eps] = draw + (mean if not any(eps) else 0.0)
        else:
            comps[eps] = np.where(distinct, draw, 0.0)
    return CanonicalTensor("selfdual", p, N, comps)


def sample_batch(spec: EnsembleSpec, count: int) -> list[CanonicalTensor]:
    """``count`` independent draws with a deterministic seed partition.

    Sample i uses the stream seeded by (spec.seed, i), so any contiguous or
    parallel evaluation of the batch yields identical tensors.
    """
    if count < 0:
        raise ValueError("count must be nonnegative")
    out = []
    for i in range(count):
        rng = np.random.default_rng(np.random.SeedSequence((spec.seed, i)))
        out.append(sample(spec, rng))
    return out


def log_density_unnormalized(t: CanonicalTensor, spec: EnsembleSpec) -> float:
    """log f(t) up to the normalizing constant: -kappa ||t - beta I||^2 / gamma.

    The norm is the dense-form Frobenius norm, so the value is exactly 0 at
    the mode t = beta*I and strictly negative elsewhere.
    """
    if t.class_tag != spec.class_tag:
        raise ValueError(f"{spec.kind} density is defined on {spec.class_tag!r} "
                         f"tensors, got {t.class_tag!r}")
    if (t.p, t.N) != (spec.p, spec.N):
        raise ValueError(f"shape mismatch: spec has (p,N)=({spec.p},{spec.N}), "
                         f"tensor ({t.p},{t.N})")
    shifted = shifted_by_identity(t, -spec.beta) if spec.beta else t
    return -_KAPPA[spec.kind](spec.p) * frobenius_norm_sq(shifted) / spec.gamma


def expected_frobenius_sq(spec: EnsembleSpec) -> float:
    """Exact E||H||^2_F for the given ensemble (dense-form norm).

    Sums Gamma * (variance + squared mean) over classes and components; for
    GOTE(0, gamma) this collapses to gamma * p * C(N+p-1, p).
    """
    p, N = spec.p, spec.N
    gam = multiplicities(p, N)
    K = class_count(p, N)
    distinct = ~_repeated_mask(p, N)
    D = int(np.sum(distinct))
    var_unit = spec.gamma * p / _VAR_FACTOR[spec.kind]   # Gamma * variance
    mean_sq = spec.beta**2 * float(np.sum(
        np.where(paired_mask(p, N), 1.0 / np.where(gam > 0, gam, 1.0), 0.0)))
    if spec.kind == "GOTE":
        return var_unit * K + mean_sq
    if spec.kind == "GUTE":
        # paired and repeated-unpaired classes are real, the rest complex
        return var_unit * (K + D) + mean_sq
    n_sym = n_anti = 0
    for eps in product(range(4), repeat=p // 2):
        if component_is_symmetric(eps):
            n_sym += 1
        else:
            n_anti += 1
    scale = 2.0 ** (p // 2)
    return scale * (var_unit * (n_sym * K + n_anti * D) + mean_sq)
