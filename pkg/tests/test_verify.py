import pytest

from invforge.dual import EvaluationError
from invforge.invcat import (
    JetSpace,
    ScalarJetFunction,
    basis,
    covariant_tensor,
    equation_function,
    two_matrix_trace_family,
)
from invforge.jetspace import d1_coord, d2_coord, field_coord, sample_generic
from invforge.liealg import catalog, make_spec, prolong2
from invforge.verify import (
    check_absolute,
    check_covariance,
    check_on_manifold,
    completeness,
    independence_rank,
    newton_project,
)


def _ops(name, n, **kw):
    return [prolong2(f) for f in catalog(make_spec(name, n, **kw))]


def test_absolute_euclid_family_passes():
    fam = basis(make_spec("AE", 3))
    report = check_absolute(_ops("AE", 3), fam, n_samples=10, seed=1)
    assert report.verdict == "PASS"
    assert report.max_residual() < 1e-9


def test_absolute_rejects_plain_derivative():
    fam = basis(make_spec("AE", 3))
    raw = ScalarJetFunction("u_x1", lambda v: v.du(1, 0),
                            (d1_coord(1, 0),), fam.space)
    report = check_absolute(_ops("AE", 3), [raw], n_samples=5, seed=1)
    assert report.verdict == "FAIL"


def test_absolute_conformal_branch_passes():
    spec = make_spec("AC", 3, lam=1.0)
    fam = basis(spec)
    report = check_absolute(_ops("AC", 3, lam=1.0), fam, n_samples=8, seed=2)
    assert report.verdict == "PASS"


def test_reports_are_deterministic():
    fam = basis(make_spec("AE", 3))
    ops = _ops("AE", 3)
    a = check_absolute(ops, fam, n_samples=6, seed=42)
    b = check_absolute(ops, fam, n_samples=6, seed=42)
    assert a == b
    c = check_absolute(ops, fam, n_samples=6, seed=43)
    assert a != c


def test_tolerance_scales_with_point_magnitude():
    # doubling every jet value must not flip the verdict of homogeneous
    # invariants
    fam = basis(make_spec("AE", 3))
    ops = _ops("AE", 3)
    base_sampler = fam.space.sampler(7)

    def doubled(idx):
        point = base_sampler(idx)
        for cid in point.coords():
            point = point.replace(cid, 2.0 * point.value(cid))
        return point

    report = check_absolute(ops, fam, n_samples=6, seed=7, sampler=doubled)
    assert report.verdict == "PASS"


def test_sensitivity_to_perturbed_member():
    fam = basis(make_spec("AE", 3))
    member = fam.members[1]
    broken = ScalarJetFunction(
        member.label + "+u_x1",
        lambda v: member.fn(v) + v.du(1, 0),
        tuple(set(member.deps) | {d1_coord(1, 0)}), fam.space)
    report = check_absolute(_ops("AE", 3), [broken], n_samples=5, seed=3)
    assert report.verdict == "FAIL"


def test_independence_rank_full_for_euclid():
    fam = basis(make_spec("AE", 3))
    rep = independence_rank(fam, n_samples=4, seed=1)
    assert rep.rank == 7
    assert rep.verdict == "PASS"


def test_independence_detects_functional_dependence():
    space = JetSpace(3, 1)
    deps = tuple(d2_coord(1, i, j) for i in range(3) for j in range(i, 3))

    def s1(v):
        return v.ddu(1, 0, 0) + v.ddu(1, 1, 1) + v.ddu(1, 2, 2)

    fam = [ScalarJetFunction("S1", s1, deps, space),
           ScalarJetFunction("S1^2", lambda v: s1(v) * s1(v), deps, space)]
    rep = independence_rank(fam, n_samples=3, seed=1)
    assert rep.rank == 1
    assert rep.verdict == "FAIL"


def test_two_matrix_traces_are_independent():
    rep = independence_rank(two_matrix_trace_family(3), n_samples=4, seed=2)
    assert rep.rank == 9


def test_two_matrix_traces_degenerate_at_identity():
    fam = two_matrix_trace_family(3)
    point = sample_generic(3, 2, seed=1)
    for i in range(3):
        for j in range(i, 3):
            point = point.replace(d2_coord(1, i, j), 1.0 if i == j else 0.0)
    from invforge.liealg import matrix_rank
    from invforge.verify import family_jacobian

    rows = family_jacobian(list(fam.members), point, fam.deps)
    rank, _ = matrix_rank(rows)
    assert rank < 9


def test_completeness_euclid():
    spec = make_spec("AE", 3)
    rep = completeness(spec, basis(spec), n_samples=8, seed=1)
    assert (rep.n_jet_vars, rep.algebra_rank, rep.expected) == (10, 3, 7)
    assert rep.verdict == "PASS"


def test_completeness_rotation_pairs():
    from invforge.invcat import rotation_pair_family

    spec = make_spec("AO", 3, m=2)
    rep = completeness(spec, rotation_pair_family(3), n_samples=6, seed=1)
    assert rep.expected == 15  # n(n+7)/2
    assert rep.verdict == "PASS"


def test_completeness_conformal_expected_count():
    spec = make_spec("AC", 3, lam=1.0)
    rep = completeness(spec, basis(spec), n_samples=8, seed=1)
    assert rep.expected == 3
    assert rep.verdict == "PASS"


def test_completeness_fails_for_truncated_family():
    spec = make_spec("AE", 3)
    fam = basis(spec)
    truncated = type(fam)(fam.label + " truncated", fam.algebra,
                          fam.members[:5], 5, fam.space, fam.deps)
    rep = completeness(spec, truncated, n_samples=6, seed=1)
    assert rep.verdict == "FAIL"
    assert rep.expected != rep.family_size


def test_on_manifold_heat_full_projective_algebra():
    E = equation_function("heat", 3, mu=1.0)
    report = check_on_manifold(_ops("AG2_I", 3, mu=1.0, rep="u"), E,
                               solve_for=d1_coord(1, 0), n_samples=8, seed=2)
    assert report.verdict == "PASS"
    assert report.max_residual() < 1e-8


def test_on_manifold_born_infeld():
    E = equation_function("born-infeld", 3)
    report = check_on_manifold(_ops("AP_BornInfeld", 3), E,
                               solve_for=d2_coord(1, 0, 0), n_samples=8,
                               seed=2)
    assert report.verdict == "PASS"


def test_on_manifold_quasilinear_eikonal():
    E = equation_function("eikonal-quasilinear", 3)
    ops = _ops("AP_inf", 3, seed=11, instances=3, extended=True)
    report = check_on_manifold(ops, E, n_samples=6, seed=4)
    assert report.verdict == "PASS"


def test_newton_projection_converges():
    E = equation_function("heat", 3, mu=1.0)
    point = E.space.sampler(3)(0)
    projected = newton_project(E, point, d1_coord(1, 0))
    assert abs(E.eval(projected)) < 1e-12


def test_newton_projection_needs_a_slope():
    space = JetSpace(3, 1)
    flat = ScalarJetFunction("const", lambda v: 1.0 + 0.0 * v.u(1),
                             (field_coord(1),), space)
    with pytest.raises(EvaluationError):
        newton_project(flat, sample_generic(3, 1, seed=1), field_coord(1))


def test_covariance_theta_and_w():
    ops = _ops("AC", 3, lam=1.0)
    rep = check_covariance(covariant_tensor("theta", 3, lam=1.0), ops,
                           n_samples=5, seed=1)
    assert rep.verdict == "PASS"
    ops0 = _ops("AC", 3, lam=0.0)
    rep_w = check_covariance(covariant_tensor("w", 3), ops0, n_samples=5,
                             seed=1)
    assert rep_w.verdict == "PASS"


def test_covariance_position_vector():
    ops = _ops("AC", 3, lam=1.0)
    rep = check_covariance(covariant_tensor("position", 3), ops,
                           n_samples=4, seed=1)
    assert rep.verdict == "PASS"


def test_covariance_hessian_under_dilation_fit():
    lam = 0.6
    ops = [op for op in _ops("AE1", 3, lam=lam) if op.label == "D"]
    rep = check_covariance(covariant_tensor("hessian", 3), ops,
                           n_samples=3, seed=1)
    assert rep.verdict == "PASS"
    fit = rep.records[0].fit
    # three skew entries then the scalar multiplier
    assert all(abs(v) < 1e-9 for v in fit[:3])
    assert abs(fit[3] - (lam - 2.0)) < 1e-9


def test_on_manifold_eikonal_and_conformal_power():
    E = equation_function("eikonal", 3)
    ops = _ops("AP_inf", 3, seed=13, instances=3)
    rep = check_on_manifold(ops, E, solve_for=d1_coord(1, 0), n_samples=5,
                            seed=9)
    assert rep.verdict == "PASS"
    E2 = equation_function("conformal-power", 3)
    ops2 = _ops("AC1n", 3, lam=0.0)
    rep2 = check_on_manifold(ops2, E2, n_samples=5, seed=9)
    assert rep2.verdict == "PASS"


def test_projective_flow_equations_fail_only_under_projective_generator():
    # the printed trace-square coefficient breaks exactly the projective
    # direction; every other generator still annihilates the residual
    for name, kw in (("galilei-projective", {"mu": 1.0}),
                     ("schrodinger-projective", {"mass": 1.0})):
        E = equation_function(name, 3, **kw)
        from invforge.invcat import EQUATIONS

        spec = EQUATIONS[name].default_algebra(3, kw)
        ops = [prolong2(f) for f in catalog(spec)]
        rep = check_on_manifold(ops, E, n_samples=4, seed=9)
        failed = {r.operator for r in rep.records if r.verdict == "FAIL"}
        assert failed == {"A"}


def test_schrodinger_on_manifold():
    E = equation_function("schrodinger", 3, mass=1.0)
    ops = _ops("AG2_II", 3, mass=1.0, rep="u")
    rep = check_on_manifold(ops, E, solve_for=d1_coord(1, 0), n_samples=5,
                            seed=3)
    assert rep.verdict == "PASS"
    assert rep.max_residual() < 1e-8
