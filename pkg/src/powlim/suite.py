"""Self-contained invariant checks runnable from the command line.

``validate_suite("fast")`` exercises every module's core invariants on
desk-scale instances in well under a minute; ``"full"`` adds the larger
property runs (interpolation property at scale, sampled iteration bounds,
meta-model accuracy). Each check runs isolated: a failure or crash marks
its row and the remaining checks still run.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sparse

from .baselines import FrobeniusMin, PodGalerkin, PodKernelRidge, pod_build, pod_solve
from .bench import rel_errors
from .eim import EimInterpolant
from .expressions import ExpressionError, parse_expression
from .family import AffineFamily, ParameterBox, monomial_matrix
from .model_io import emit_json, model_from_dict, model_to_dict
from .multi_index import count_multi_indices, enumerate_multi_indices
from .problems import generate_problem
from .sampling import explicit_sample, maximin_lhs
from .surrogates import Surrogate, exact_inverse, exact_logdet, exact_solve
from .validators import (
    LogDetSeriesConfig,
    RichardsonConfig,
    brute_power_expand,
    logdet_series,
    logdet_series_bound,
    power_interp_check,
    richardson_iterate,
    richardson_sampled_bound,
)


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    seconds: float
    detail: str


def _random_spd_family(n: int, d: int, seed: int, lo: float = 0.5, hi: float = 2.0) -> AffineFamily:
    """d random SPD terms with linear coefficients on (lo, hi)^d."""
    rng = np.random.default_rng(seed)
    terms = []
    for _ in range(d):
        raw = rng.standard_normal((n, n))
        terms.append(sparse.csr_matrix(raw @ raw.T + n * np.eye(n)))
    return AffineFamily(
        terms=terms,
        coeffs=[f"mu{l}" for l in range(1, d + 1)],
        box=ParameterBox.from_pairs([[lo, hi]] * d),
        symmetric=True,
        spd=True,
    )


def _small_thermal():
    return generate_problem("laplace2d_thermal", 6)


def _check_counting() -> str:
    for m in range(0, 7):
        for d in range(1, 7):
            brute = len(enumerate_multi_indices(m, d))
            counted = count_multi_indices(m, d)
            assert counted == brute, f"count({m},{d}) = {counted}, brute = {brute}"
    anchors = {(1, 10): 11, (10, 2): 66, (3, 10): 286, (3, 14): 680}
    for (m, d), expected in anchors.items():
        got = count_multi_indices(m, d)
        assert got == expected, f"count({m},{d}) = {got}, expected {expected}"
    return "brute force 0<=m<=6, 1<=d<=6 plus 4 closed-form anchors"


def _check_greedy_trace() -> str:
    family = AffineFamily(
        terms=[sparse.identity(2, format="csr")],
        coeffs=["mu1"],
        box=ParameterBox.from_pairs([[1.0, 3.0]]),
    )
    sample = explicit_sample([[1.0], [2.0], [3.0]])
    model = EimInterpolant(m=1, sample=sample).fit(family)
    assert model.selected_mu_[:, 0].tolist() == [3.0, 1.0], model.selected_mu_
    assert model.selected_k_.tolist() == [[1], [0]], model.selected_k_
    return "d=1 sample {1,2,3}: selects (mu=3, k=(1)) then (mu=1, k=(0))"


def _check_interpolation_property(n_mu: int = 50) -> str:
    family, _ = _small_thermal()
    model = EimInterpolant(m=2, n_sample=2000).fit(family)
    mus = family.box.uniform(n_mu, seed=11)
    worst = 0.0
    for mu in mus:
        for k in model.selected_k_:
            exact = model.g_exact(mu, k)
            approx = model.interpolate(mu, k)
            worst = max(worst, abs(approx - exact) / max(1.0, abs(exact)))
    assert worst <= 1e-10, f"worst interpolation-property error {worst:.3e}"
    return f"selected k reproduced at {n_mu} random mu, worst {worst:.2e}"


def _check_partition_of_unity() -> str:
    family, _ = generate_problem("logdet_thermal", 6)
    model = EimInterpolant(m=3, force_k0=True, n_sample=2000).fit(family)
    mus = family.box.uniform(100, seed=3)
    sums = model.lambda_weights(mus).sum(axis=1)
    worst = float(np.abs(sums - 1.0).max())
    assert worst <= 1e-12, f"worst |sum(lambda) - 1| = {worst:.3e}"
    return f"force_k0 weights sum to 1 within {worst:.2e} at 100 mu"


def _check_basis_structure() -> str:
    family, _ = _small_thermal()
    model = EimInterpolant(m=3, n_sample=2000).fit(family)
    b = model.B_
    upper = np.triu(b, k=1)
    assert np.abs(upper).max() == 0.0, "B has nonzeros above the diagonal"
    assert np.allclose(np.diag(b), 1.0, atol=0, rtol=0), "B diagonal is not exactly 1"
    assert np.abs(b).max() <= 1 + 1e-12, f"max |B| = {np.abs(b).max()}"
    return "B unit lower triangular with |B| <= 1 + 1e-12"


def _check_route_agreement() -> str:
    family, _ = _small_thermal()
    model = EimInterpolant(m=3, n_sample=2000).fit(family)
    rng = np.random.default_rng(5)
    worst = 0.0
    for _ in range(20):
        mu = family.box.uniform(1, seed=int(rng.integers(1 << 30)))[0]
        k = model.index_set_.indices[int(rng.integers(len(model.index_set_)))]
        a = model.interpolate(mu, k, route="lambda")
        b = model.interpolate(mu, k, route="beta")
        worst = max(worst, abs(a - b) / max(1.0, abs(a)))
    assert worst <= 1e-11, f"route disagreement {worst:.3e}"
    return f"lambda and beta routes agree within {worst:.2e}"


def _check_rel_errors() -> str:
    assert rel_errors([1.0, 0.0], [1.0, 0.0]) == (0.0, 0.0)
    assert rel_errors([1.0, 0.0], [0.0, 0.0]) == (1.0, 1.0)
    l2, linf = rel_errors([3.0, 4.0], [3.0, 0.0])
    assert abs(l2 - 0.8) < 1e-15 and abs(linf - 1.0) < 1e-15, (l2, linf)
    return "hand values (0,0), (1,1), (0.8,1.0) reproduced"


def _check_pod() -> str:
    family, rhs = _small_thermal()
    mus = family.box.uniform(8, seed=21)
    snapshots = [exact_solve(family, mu, rhs) for mu in mus]
    basis = pod_build(snapshots, energy_tol=0.0)
    gram = basis.vectors @ basis.vectors.T
    ortho = np.abs(gram - np.eye(basis.n_modes)).max()
    assert ortho <= 1e-10, f"orthonormality defect {ortho:.3e}"
    mu = family.box.uniform(1, seed=77)[0]
    approx = pod_solve(family, basis, rhs, mu)
    reduced_residual = basis.vectors @ (rhs - family.assemble(mu) @ approx)
    galerkin = np.abs(reduced_residual).max()
    assert galerkin <= 1e-10, f"Galerkin residual {galerkin:.3e}"
    return f"orthonormal within {ortho:.2e}, Galerkin residual {galerkin:.2e}"


def _check_frobenius() -> str:
    family = _random_spd_family(4, 2, seed=13)
    anchors = family.box.uniform(3, seed=1)
    est = FrobeniusMin(selected_mu=anchors, quantity="inverse").fit(family)
    t4 = est.trace4_
    swap = np.abs(t4 - t4.transpose(1, 0, 3, 2)).max()
    assert swap <= 1e-8 * np.abs(t4).max(), f"trace4 swap asymmetry {swap:.3e}"
    mu = family.box.midpoint
    alphas = family.eval_coeffs(mu)
    matrix = np.einsum("ijlm,l,m->ij", t4, alphas, alphas)
    a_mu = family.assemble(mu).toarray()
    direct = np.empty_like(matrix)
    for i in range(len(anchors)):
        for j in range(len(anchors)):
            direct[i, j] = np.trace(a_mu.T @ est.inverses_[i].T @ est.inverses_[j] @ a_mu)
    rel = np.abs(matrix - direct).max() / np.abs(direct).max()
    assert rel <= 1e-8, f"assembled M(mu) vs direct definition: {rel:.3e}"
    eigs = np.linalg.eigvalsh(0.5 * (matrix + matrix.T))
    assert eigs.min() >= -1e-10 * max(1.0, eigs.max()), f"M(mu) indefinite: {eigs.min():.3e}"
    return f"trace tensor matches direct definition within {rel:.2e}, M psd"


def _check_richardson() -> str:
    family = _random_spd_family(5, 2, seed=29)
    mid = family.box.midpoint
    cfg = RichardsonConfig(psi=family.assemble(mid), x0=np.zeros((5, 5)), steps=12)
    mu = family.box.uniform(1, seed=4)[0]
    result = richardson_iterate(family, mu, cfg)
    gap = np.abs(result.iterates[-1] - result.closed_form).max()
    assert gap <= 1e-10, f"recurrence vs closed form: {gap:.3e}"
    identity = AffineFamily(
        terms=[sparse.identity(3, format="csr")], coeffs=["1"],
        box=ParameterBox.from_pairs([[0.0, 1.0]]),
    )
    one = richardson_iterate(
        identity, [0.5], RichardsonConfig(psi=np.eye(3), x0=np.zeros((3, 3)), steps=1)
    )
    assert np.abs(one.iterates[1] - np.eye(3)).max() == 0.0, "one-step identity case"
    return f"iterates match the closed form within {gap:.2e}"


def _check_logdet_series() -> str:
    diag = AffineFamily(
        terms=[sparse.csr_matrix(np.diag([1.0, 2.0]))], coeffs=["1"],
        box=ParameterBox.from_pairs([[0.0, 1.0]]), symmetric=True, spd=True,
    )
    cfg = LogDetSeriesConfig(rho_max=4.0, rho_min=1.0, steps=30)
    approx = logdet_series(diag, [0.5], cfg)
    err = abs(approx - np.log(2.0))
    bound = logdet_series_bound(2, cfg)
    assert err <= bound, f"error {err:.3e} above bound {bound:.3e}"
    scaled = AffineFamily(
        terms=[sparse.csr_matrix(2.0 * np.eye(3))], coeffs=["1"],
        box=ParameterBox.from_pairs([[0.0, 1.0]]), symmetric=True, spd=True,
    )
    exact_case = logdet_series(scaled, [0.5], LogDetSeriesConfig(2.0, 2.0, 5))
    assert abs(exact_case - 3 * np.log(2.0)) <= 1e-14, "A = rho_M I should be exact"
    return f"diag(1,2) series error {err:.2e} <= bound {bound:.2e}"


def _check_brute_power() -> str:
    family = _random_spd_family(4, 3, seed=31)
    mu = family.box.uniform(1, seed=9)[0]
    expansion = brute_power_expand(family, mu, 3)
    direct = np.linalg.matrix_power(family.assemble(mu).toarray(), 3)
    rel = np.abs(expansion.total - direct).max() / np.abs(direct).max()
    assert rel <= 1e-10, f"grouped expansion vs matrix power: {rel:.3e}"
    two = _random_spd_family(4, 2, seed=37)
    terms = brute_power_expand(two, two.box.midpoint, 2).terms
    a1 = two.terms[0].toarray()
    a2 = two.terms[1].toarray()
    assert np.allclose(terms[(1, 1)], a1 @ a2 + a2 @ a1, rtol=0, atol=1e-12)
    assert np.allclose(terms[(2, 0)], a1 @ a1, rtol=0, atol=1e-12)
    assert np.allclose(terms[(0, 2)], a2 @ a2, rtol=0, atol=1e-12)
    return f"p=3 expansion within {rel:.2e}; p=2 grouped terms exact"


def _check_surrogate_exactness() -> str:
    family, rhs = _small_thermal()
    model = EimInterpolant(m=2, n_sample=2000).fit(family)
    model_k0 = EimInterpolant(m=2, force_k0=True, n_sample=2000).fit(family)
    worst = 0.0
    solve = Surrogate(model=model, quantity="solve", rhs=rhs).fit(family)
    inverse = Surrogate(model=model, quantity="inverse").fit(family)
    logdet = Surrogate(model=model_k0, quantity="logdet").fit(family)
    for j, mu in enumerate(model.selected_mu_):
        worst = max(worst, rel_errors(exact_solve(family, mu, rhs), solve.predict(mu))[0])
        worst = max(worst, rel_errors(exact_inverse(family, mu), inverse.predict(mu))[0])
    for j, mu in enumerate(model_k0.selected_mu_):
        worst = max(worst, rel_errors(exact_logdet(family, mu), logdet.predict(mu))[0])
    assert worst <= 1e-10, f"selected-point exactness defect {worst:.3e}"
    return f"all three quantities exact at selected mu within {worst:.2e}"


def _check_model_roundtrip() -> str:
    family, _ = _small_thermal()
    model = EimInterpolant(m=2, n_sample=500).fit(family)
    text = emit_json(model_to_dict(model))
    clone = model_from_dict(__import__("json").loads(text))
    text2 = emit_json(model_to_dict(clone))
    assert text == text2, "serialize -> load -> serialize is not the identity"
    mu = family.box.midpoint
    gap = np.abs(model.lambda_weights(mu) - clone.lambda_weights(mu)).max()
    assert gap == 0.0, f"weights changed across a roundtrip by {gap:.3e}"
    return "byte-identical re-serialization, identical weights"


def _check_sampling() -> str:
    a = maximin_lhs(2, 16, seed=7)
    b = maximin_lhs(2, 16, seed=7)
    assert np.array_equal(a.points, b.points), "maximin_lhs is not deterministic"
    one_d = maximin_lhs(1, 4, seed=0)
    strata = np.sort(np.floor(one_d.points[:, 0] * 4).astype(int))
    assert strata.tolist() == [0, 1, 2, 3], f"not stratified: {strata}"
    return "deterministic per seed; one point per stratum at r=1, n=4"


def _check_expressions() -> str:
    expr = parse_expression("0.045*(1-exp(-mu1^2))")
    value = float(expr(np.array([2.0])))
    assert abs(value - 0.045 * (1 - np.exp(-4.0))) <= 1e-16, value
    try:
        parse_expression("mu0 + 1")
    except ExpressionError as exc:
        assert exc.offset == 0, exc.offset
    else:
        raise AssertionError("mu0 must be rejected")
    return "saturating coefficient evaluates to 0.0441757962500070 at mu1=2"


def _check_property_at_scale() -> str:
    return _check_interpolation_property(n_mu=200)


def _check_power_exactness() -> str:
    worst = 0.0
    for seed in range(3):
        family = _random_spd_family(4, 2, seed=100 + seed)
        model = EimInterpolant(m=3, n_sample=2000).fit(family)
        mu = family.box.uniform(1, seed=seed)[0]
        for p in range(1, 4):
            direct = brute_power_expand(family, mu, p).total
            approx = power_interp_check(model, family, mu, p)
            worst = max(worst, np.abs(approx - direct).max() / np.abs(direct).max())
    assert worst <= 1e-8, f"full-budget power reconstruction defect {worst:.3e}"
    return f"p <= m reconstruction within {worst:.2e} on 3 random families"


def _check_ridge_accuracy() -> str:
    rng = np.random.default_rng(0)
    x = np.linspace(0.0, 1.0, 20)[:, None]
    from .baselines import ridge_fit, ridge_predict

    model = ridge_fit(x, np.sin(2 * np.pi * x[:, 0]), bandwidth=0.2, reg=1e-8)
    grid = rng.uniform(0, 1, 400)[:, None]
    err = np.abs(ridge_predict(model, grid)[:, 0] - np.sin(2 * np.pi * grid[:, 0])).max()
    assert err <= 1e-2, f"kernel ridge sin error {err:.3e}"
    return f"sin regression max error {err:.2e} <= 1e-2"


def _check_richardson_bound() -> str:
    family = _random_spd_family(10, 2, seed=41)
    mid = family.box.midpoint
    cfg = RichardsonConfig(psi=family.assemble(mid), x0=np.zeros((10, 10)), steps=15)
    mus = family.box.uniform(20, seed=6)
    eps0, rho = richardson_sampled_bound(family, cfg, mus)
    worst_margin = np.inf
    for mu in mus:
        result = richardson_iterate(family, mu, cfg)
        err = np.linalg.norm(result.iterates[-1] - np.linalg.inv(family.assemble(mu).toarray()), 2)
        bound = eps0 * rho**cfg.steps
        worst_margin = min(worst_margin, bound * (1 + 1e-9) - err)
        assert err <= bound * (1 + 1e-9), f"bound violated: {err:.3e} > {bound:.3e}"
    return f"sampled geometric bound holds at 20 mu (slack >= {worst_margin:.2e})"


def _check_logdet_bound() -> str:
    family = _random_spd_family(8, 2, seed=43)
    mus = family.box.uniform(20, seed=8)
    eigs = [np.linalg.eigvalsh(family.assemble(mu).toarray()) for mu in mus]
    rho_max = 1.01 * max(e.max() for e in eigs)
    rho_min = min(e.min() for e in eigs)
    for steps in (5, 10, 20):
        cfg = LogDetSeriesConfig(rho_max, rho_min, steps)
        bound = logdet_series_bound(family.n, cfg)
        for mu in mus:
            err = abs(logdet_series(family, mu, cfg) - exact_logdet(family, mu))
            assert err <= bound, f"m={steps}: {err:.3e} > bound {bound:.3e}"
    return "truncation bound holds at 20 mu for m in {5, 10, 20}"


_FAST_CHECKS = [
    ("multi_index.counting", _check_counting),
    ("eim.greedy_hand_trace", _check_greedy_trace),
    ("eim.interpolation_property", _check_interpolation_property),
    ("eim.partition_of_unity", _check_partition_of_unity),
    ("eim.basis_structure", _check_basis_structure),
    ("eim.route_agreement", _check_route_agreement),
    ("bench.rel_errors", _check_rel_errors),
    ("baselines.pod", _check_pod),
    ("baselines.frobenius", _check_frobenius),
    ("validators.richardson", _check_richardson),
    ("validators.logdet_series", _check_logdet_series),
    ("validators.brute_power", _check_brute_power),
    ("surrogates.selected_point_exactness", _check_surrogate_exactness),
    ("model_io.roundtrip", _check_model_roundtrip),
    ("sampling.maximin", _check_sampling),
    ("expressions.worked_values", _check_expressions),
]

_FULL_CHECKS = _FAST_CHECKS + [
    ("eim.property_at_scale", _check_property_at_scale),
    ("surrogates.power_exactness", _check_power_exactness),
    ("baselines.ridge_accuracy", _check_ridge_accuracy),
    ("validators.richardson_bound", _check_richardson_bound),
    ("validators.logdet_bound", _check_logdet_bound),
]


def validate_suite(level: str = "fast") -> list[CheckResult]:
    """Run the named check battery; returns one result row per check."""
    if level not in ("fast", "full"):
        raise ValueError(f"level must be 'fast' or 'full', got {level!r}")
    checks = _FAST_CHECKS if level == "fast" else _FULL_CHECKS
    results = []
    for name, fn in checks:
        start = time.perf_counter()
        try:
            detail = fn()
            passed = True
        except Exception as exc:  # noqa: BLE001 - isolate every check
            detail = f"{type(exc).__name__}: {exc}"
            passed = False
        results.append(CheckResult(name, passed, time.perf_counter() - start, detail))
    return results
