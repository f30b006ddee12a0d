"""Statistical verification harness.

Four sample-level checks of what the ensembles are supposed to look like:

* ``invariance_test`` -- the law is unchanged by a Haar group element,
* ``gaussianity_independence_test`` -- canonical entries are independent
  Gaussians with the advertised means and variances,
* ``derivative_identity_test`` -- the analytic rotation derivative matches a
  finite difference of the one-parameter action,
* ``isotropy_test`` -- the flattened, normalized real-symmetric sample is
  uniform on the unit sphere.

Every test consumes randomness through a deterministic per-sample seed
partition (seed, sample index), so reports are bit-reproducible.  Two-sample
comparisons use Kolmogorov-Smirnov at level 0.01 with a Bonferroni correction
across subtests; moment comparisons use a 4-standard-error band under the
Gaussian null.

Note on power: trace invariants are *pointwise* fixed by the matching group
action, so comparing their before/after distributions can never reject.  The
invariance test therefore also compares the distributions of the dense tensor
coordinates themselves, which do move under the action; that is what gives
the test power against non-invariant laws (e.g. i.i.d. uniform entries),
while the invariant subtests double as exact-invariance sanity checks.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import stats

from .ensembles import EnsembleSpec, sample
from .groups import act_dense, flavor_for_class, givens_rotation, haar_sample, theta_derivative
from .invariants import TraceGraph, evaluate, melon_graph
from .tensor import (
    CanonicalTensor,
    canonicalize,
    class_count,
    component_is_symmetric,
    densify,
    flatten_isometry,
    identity_tensor,
    lead_component_key,
    multiplicities,
    shifted_by_identity,
    unflatten_isometry,
    _component_keys,
    _repeated_mask,
)

__all__ = [
    "ALPHA",
    "MIN_SAMPLES",
    "Subtest",
    "VerificationReport",
    "constant_sampler",
    "derivative_identity_test",
    "gaussianity_independence_test",
    "invariance_test",
    "isotropy_test",
    "report_to_dict",
    "rotated_spike_sampler",
    "sphere_sampler",
    "uniform_entry_sampler",
]

ALPHA = 0.01
MIN_SAMPLES = 100
Z_BOUND = 4.0
MAX_COORDS = 64


@dataclass(frozen=True)
class Subtest:
    name: str
    statistic: float
    threshold: float
    p_value: float | None
    passed: bool


@dataclass(frozen=True)
class VerificationReport:
    """Outcome of one verification suite.

    The headline ``statistic``/``p_value`` summarize the worst subtest; the
    verdict is the conjunction of all subtest verdicts.
    """

    test: str
    statistic: float
    threshold: float
    p_value: float | None
    passed: bool
    n_samples: int
    seed: int
    subtests: tuple[Subtest, ...]


def report_to_dict(report: VerificationReport) -> dict:
    return {
        "test": report.test,
        "statistic": float(report.statistic),
        "threshold": float(report.threshold),
        "p_value": None if report.p_value is None else float(report.p_value),
        "passed": bool(report.passed),
        "n_samples": int(report.n_samples),
        "seed": int(report.seed),
        "subtests": [
            {"name": s.name, "statistic": float(s.statistic),
             "threshold": float(s.threshold),
             "p_value": None if s.p_value is None else float(s.p_value),
             "passed": bool(s.passed)}
            for s in report.subtests
        ],
    }


def _stream(seed: int, index: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence((seed, index)))


# index offsets for auxiliary streams, far above any sample count
_AUX = 1 << 40


def _resolve_sampler(sampler):
    """Accept an EnsembleSpec or a callable(rng) -> CanonicalTensor."""
    if isinstance(sampler, EnsembleSpec):
        spec = sampler
        return (lambda rng: sample(spec, rng)), spec
    if callable(sampler):
        return sampler, None
    raise TypeError(f"sampler must be an EnsembleSpec or callable, got {type(sampler)!r}")


def _finish(name, subtests, n_samples, seed):
    # headline = the worst subtest (failing ones first, then largest statistic)
    worst = max(subtests, key=lambda s: (not s.passed, s.statistic),
                default=None)
    pvals = [s.p_value for s in subtests if s.p_value is not None]
    return VerificationReport(
        test=name,
        statistic=float(worst.statistic) if worst else 0.0,
        threshold=float(worst.threshold) if worst else 0.0,
        p_value=float(min(pvals)) if pvals else None,
        passed=all(s.passed for s in subtests),
        n_samples=n_samples,
        seed=seed,
        subtests=tuple(subtests),
    )


def _coord_matrix(flat: list[np.ndarray]) -> tuple[np.ndarray, list[str]]:
    """Stack raveled dense tensors into real columns (capped, deterministic)."""
    arr = np.array(flat)
    if np.iscomplexobj(arr):
        cols = np.concatenate([arr.real, arr.imag], axis=1)
        tags = [f"coord[{j}]" for j in range(arr.shape[1])] + \
               [f"coord[{j}].im" for j in range(arr.shape[1])]
    else:
        cols = arr
        tags = [f"coord[{j}]" for j in range(arr.shape[1])]
    if cols.shape[1] > MAX_COORDS:
        keep = np.unique(np.linspace(0, cols.shape[1] - 1, MAX_COORDS).astype(int))
        cols = cols[:, keep]
        tags = [tags[j] for j in keep]
    return cols, tags


def invariance_test(sampler, flavor: str | None = None,
                    invariant_graphs: tuple[TraceGraph, ...] | None = None,
                    n_samples: int = 5000, seed: int = 0) -> VerificationReport:
    """Two-sample comparison of {t} against {U.t}, one Haar U per draw.

    Subtests: a KS test per trace invariant (exact invariance makes these
    identical-sample comparisons) and a KS test per dense coordinate, which
    carries the actual power.  Pass iff every p-value clears alpha/(number of
    subtests).
    """
    if n_samples < MIN_SAMPLES:
        raise ValueError(f"need at least {MIN_SAMPLES} samples, got {n_samples}")
    draw, _ = _resolve_sampler(sampler)
    base, rotated = [], []
    inv0, inv1 = None, None
    for i in range(n_samples):
        rng = _stream(seed, i)
        t = draw(rng)
        if flavor is None:
            flavor = flavor_for_class(t.class_tag)
        if invariant_graphs is None:
            convention = {"sym": "real", "antisym": "real",
                          "herm": "hermitian", "selfdual": "selfdual"}[t.class_tag]
            invariant_graphs = (melon_graph(t.p, convention),)
        if inv0 is None:
            inv0 = [[] for _ in invariant_graphs]
            inv1 = [[] for _ in invariant_graphs]
        g = haar_sample(flavor, t.N, rng)
        d0 = densify(t)
        d1 = act_dense(g, d0, t.p)
        base.append(d0.ravel())
        rotated.append(d1.ravel())
        for k, gph in enumerate(invariant_graphs):
            inv0[k].append(evaluate(gph, d0))
            inv1[k].append(evaluate(gph, d1))

    subtests = []

    def ks_subtest(name, a, b):
        # The samples are index-paired (same tensor before/after rotation), so
        # pointwise agreement at numerical precision means the distributions
        # are identical; skipping KS there keeps rounding dust from turning a
        # degenerate-but-invariant law into a rejection.
        a = np.asarray(a)
        b = np.asarray(b)
        if np.allclose(a, b, rtol=1e-9, atol=1e-12):
            subtests.append((name, 0.0, 1.0))
            return
        res = stats.ks_2samp(a, b, method="asymp")
        subtests.append((name, float(res.statistic), float(res.pvalue)))

    for k in range(len(invariant_graphs)):
        v0, v1 = np.asarray(inv0[k]), np.asarray(inv1[k])
        if np.iscomplexobj(v0) or np.iscomplexobj(v1):
            ks_subtest(f"invariant[{k}].re", np.real(v0), np.real(v1))
            ks_subtest(f"invariant[{k}].im", np.imag(v0), np.imag(v1))
        else:
            ks_subtest(f"invariant[{k}]", v0, v1)
    X0, tags = _coord_matrix(base)
    X1, _ = _coord_matrix(rotated)
    for j, tag in enumerate(tags):
        ks_subtest(tag, X0[:, j], X1[:, j])

    level = ALPHA / len(subtests)
    subs = tuple(Subtest(name, stat, level, p, p >= level)
                 for name, stat, p in subtests)
    return _finish("invariance", list(subs), n_samples, seed)


def _entry_moments(spec: EnsembleSpec) -> tuple[np.ndarray, np.ndarray]:
    """Theoretical per-canonical-entry (mean, variance), components stacked
    in storage order."""
    p, N = spec.p, spec.N
    gam = multiplicities(p, N)
    ident = identity_tensor(p, N).values
    base_var = spec.gamma * p / gam
    distinct = (~_repeated_mask(p, N)).astype(float)
    lead = lead_component_key(spec.class_tag, p)
    means, variances = [], []
    for key in _component_keys(spec.class_tag, p):
        means.append(spec.beta * ident if key == lead else np.zeros_like(ident))
        if spec.kind == "GOTE":
            variances.append(base_var)
        elif spec.kind == "GUTE":
            v = base_var / 2.0
            variances.append(v if key == (0,) else v * distinct)
        else:
            v = base_var / 4.0
            variances.append(v if component_is_symmetric(key) else v * distinct)
    return np.concatenate(means), np.concatenate(variances)


def _stack_entries(t: CanonicalTensor) -> np.ndarray:
    return np.concatenate([t.component(key)
                           for key in _component_keys(t.class_tag, t.p)])


def gaussianity_independence_test(sampler, n_samples: int = 5000, seed: int = 0,
                                  *, reference: EnsembleSpec | None = None
                                  ) -> VerificationReport:
    """Moments 1-4 of every canonical entry against the Gaussian values the
    ensemble prescribes, plus pairwise correlations against 0.

    All bands are 4 standard errors under the null; the null standard errors
    use the theoretical variance, so a degenerate sampler fails cleanly.  A
    plain callable sampler needs ``reference=`` to supply the theory.
    """
    if n_samples < MIN_SAMPLES:
        raise ValueError(f"need at least {MIN_SAMPLES} samples, got {n_samples}")
    draw, spec = _resolve_sampler(sampler)
    if reference is None:
        reference = spec
    if reference is None:
        raise ValueError("a callable sampler needs reference= for theoretical moments")

    X = np.array([_stack_entries(draw(_stream(seed, i))) for i in range(n_samples)])
    mu, var = _entry_moments(reference)
    if X.shape[1] != mu.size:
        raise ValueError(f"sampler produced {X.shape[1]} entries, reference "
                         f"ensemble has {mu.size}")
    n = n_samples
    subtests = []
    live = []
    for j in range(mu.size):
        name = f"entry[{j}]"
        if var[j] == 0.0:
            dev = float(np.max(np.abs(X[:, j] - mu[j])))
            subtests.append(Subtest(f"{name}.const", dev, 0.0, None, dev <= 0.0))
            continue
        live.append(j)
        sd = np.sqrt(var[j])
        centered = X[:, j] - np.mean(X[:, j])
        checks = [
            ("mean", abs(np.mean(X[:, j]) - mu[j]) / (sd / np.sqrt(n))),
            ("var", abs(np.var(X[:, j], ddof=1) - var[j])
             / (var[j] * np.sqrt(2.0 / (n - 1)))),
            ("skew", abs(np.mean(centered ** 3)) / np.sqrt(6.0 * sd ** 6 / n)),
            ("kurt", abs(np.mean(centered ** 4) - 3.0 * var[j] ** 2)
             / np.sqrt(96.0 * sd ** 8 / n)),
        ]
        for tag, z in checks:
            z = float(z)
            subtests.append(Subtest(f"{name}.{tag}", z, Z_BOUND, None, z <= Z_BOUND))
    for a in range(len(live)):
        for b in range(a + 1, len(live)):
            ja, jb = live[a], live[b]
            sa = np.std(X[:, ja])
            sb = np.std(X[:, jb])
            if sa == 0.0 or sb == 0.0:
                continue  # the variance subtest already failed for that entry
            r = float(np.mean((X[:, ja] - X[:, ja].mean()) * (X[:, jb] - X[:, jb].mean())) / (sa * sb))
            z = float(abs(r) * np.sqrt(n))
            subtests.append(Subtest(f"corr[{ja},{jb}]", z, Z_BOUND, None, z <= Z_BOUND))
    return _finish("gaussianity-independence", subtests, n_samples, seed)


def derivative_identity_test(n_trials: int = 100, seed: int = 0,
                             h: float = 1e-5, tol: float = 1e-6) -> VerificationReport:
    """Analytic rotation derivative vs the central finite difference of the
    one-parameter action at theta = 0, on random symmetric tensors with
    p <= 4, N <= 3."""
    configs = [(p, N) for p in (1, 2, 3, 4) for N in (2, 3)]
    worst = {c: 0.0 for c in configs}
    for i in range(n_trials):
        p, N = configs[i % len(configs)]
        rng = _stream(seed, i)
        t = CanonicalTensor("sym", p, N, {(): rng.standard_normal(class_count(p, N))})
        analytic = densify(theta_derivative(t))
        up = act_dense(givens_rotation(h, N, "orthogonal"), t)
        dn = act_dense(givens_rotation(-h, N, "orthogonal"), t)
        err = float(np.max(np.abs(analytic - (up - dn) / (2.0 * h))))
        worst[(p, N)] = max(worst[(p, N)], err)
    subtests = [Subtest(f"p={p},N={N}", e, tol, None, e <= tol)
                for (p, N), e in worst.items()]
    return _finish("derivative-identity", subtests, n_trials, seed)


def isotropy_test(sampler, n_samples: int = 5000, seed: int = 0,
                  *, center: bool = False) -> VerificationReport:
    """Uniformity on the unit sphere of the flattened, normalized samples.

    Subtests: each squared coordinate has mean 1/K (4 standard errors, using
    the exact sphere variance of u_k^2), and projections onto 10 fixed random
    directions agree with the same projections of a directly sampled uniform
    sphere cloud (KS at alpha/10).  With ``center=True`` the empirical mean
    of the leading entry times the identity tensor is subtracted first --
    exploratory diagnostics for shifted laws.
    """
    if n_samples < MIN_SAMPLES:
        raise ValueError(f"need at least {MIN_SAMPLES} samples, got {n_samples}")
    draw, _ = _resolve_sampler(sampler)
    flats = []
    for i in range(n_samples):
        t = draw(_stream(seed, i))
        if t.class_tag != "sym":
            raise ValueError("isotropy_test expects real-symmetric samples")
        flats.append(flatten_isometry(t))
    X = np.array(flats)
    p_, N_ = t.p, t.N
    K = class_count(p_, N_)
    if K < 3:
        raise ValueError(f"need at least 3 flattened components, got K={K}")
    if center:
        # subtract (empirical mean of the leading all-ones entry) * identity
        lead = float(np.mean(X[:, 0] / np.sqrt(multiplicities(p_, N_)[0])))
        X = X - lead * flatten_isometry(identity_tensor(p_, N_))
    norms = np.linalg.norm(X, axis=1)
    if np.any(norms == 0.0):
        raise ValueError("cannot normalize a zero sample")
    U = X / norms[:, None]

    subtests = []
    var_coord = 3.0 / (K * (K + 2)) - 1.0 / K ** 2
    se = np.sqrt(var_coord / n_samples)
    for k in range(K):
        z = float(abs(np.mean(U[:, k] ** 2) - 1.0 / K) / se)
        subtests.append(Subtest(f"coord_sq[{k}]", z, Z_BOUND, None, z <= Z_BOUND))

    rng_dir = _stream(seed, _AUX)
    rng_sph = _stream(seed, _AUX + 1)
    V = rng_sph.standard_normal((n_samples, K))
    V /= np.linalg.norm(V, axis=1)[:, None]
    level = ALPHA / 10
    for j in range(10):
        w = rng_dir.standard_normal(K)
        w /= np.linalg.norm(w)
        res = stats.ks_2samp(U @ w, V @ w, method="asymp")
        subtests.append(Subtest(f"projection[{j}]", float(res.statistic), level,
                                float(res.pvalue), bool(res.pvalue >= level)))
    name = "isotropy-centered" if center else "isotropy"
    return _finish(name, subtests, n_samples, seed)


# -- designed counterexample and oracle samplers ---------------------------


def uniform_entry_sampler(p: int, N: int):
    """i.i.d. uniform[0,1] canonical entries: a product law that is *not*
    orthogonally invariant."""
    K = class_count(p, N)

    def draw(rng: np.random.Generator) -> CanonicalTensor:
        return CanonicalTensor("sym", p, N, {(): rng.uniform(0.0, 1.0, K)})

    return draw


def constant_sampler(t: CanonicalTensor):
    """Always returns the same tensor (degenerate law)."""

    def draw(rng: np.random.Generator) -> CanonicalTensor:
        return t

    return draw


def rotated_spike_sampler(p: int, N: int, beta: float = 0.0, scale: float = 1.0):
    """beta*identity + scale * v^(tensor p) with v uniform on the sphere.

    The law is orthogonally invariant for p <= 2 (and for beta = 0, any p)
    but its entries are strongly dependent -- the designed counterexample for
    the independence test.
    """

    def draw(rng: np.random.Generator) -> CanonicalTensor:
        v = rng.standard_normal(N)
        v /= np.linalg.norm(v)
        dense = np.array(scale)
        for _ in range(p):
            dense = np.multiply.outer(dense, v)
        t = canonicalize(dense, "sym")
        return shifted_by_identity(t, beta) if beta else t

    return draw


def sphere_sampler(p: int, N: int):
    """Uniform on the flattened unit sphere, pushed back through the inverse
    isometry -- passes isotropy by construction."""
    K = class_count(p, N)

    def draw(rng: np.random.Generator) -> CanonicalTensor:
        u = rng.standard_normal(K)
        return unflatten_isometry(u / np.linalg.norm(u), p, N)

    return draw
