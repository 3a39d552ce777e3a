import math
import random

import pytest

from conftest import (
    brute_mixed_trace,
    brute_power_form,
    brute_power_trace,
    finite_difference,
    random_symmetric,
)
from invforge.dual import EvaluationError
from invforge.invcat import (
    basis,
    covariant_tensor,
    equation_function,
    equation_residual,
    mixed_power_trace,
    power_form,
    power_trace,
    two_matrix_trace_family,
)
from invforge.jetspace import (
    COMPLEX,
    d1_coord,
    d2_coord,
    euclidean,
    minkowski,
    sample_generic,
)
from invforge.liealg import make_spec, matrix_rank
from invforge.verify import family_jacobian


def test_power_trace_diag_example():
    mat = [[1.0, 0, 0], [0, 2.0, 0], [0, 0, 3.0]]
    assert power_trace(mat, euclidean(3), 2) == 14


def test_power_trace_identity():
    eye = [[1.0 if i == j else 0.0 for j in range(3)] for i in range(3)]
    for k in range(1, 5):
        assert power_trace(eye, euclidean(3), k) == 3


@pytest.mark.parametrize("metric", [euclidean(3), minkowski(3)])
def test_power_trace_matches_index_sum(metric, rng):
    for _ in range(5):
        mat = random_symmetric(3, rng)
        for k in (1, 2, 3, 4):
            got = power_trace(mat, metric, k)
            want = brute_power_trace(mat, metric.signs, k)
            assert abs(got - want) < 1e-10 * (1.0 + abs(want))


def test_power_form_k1():
    assert power_form([1.0, 2.0], [[0, 0], [0, 0]], euclidean(2), 1) == 5


def test_power_form_k2_picks_matrix_entry():
    mat = [[4.0, 0, 0], [0, 1.0, 0], [0, 0, 2.0]]
    assert power_form([1.0, 0, 0], mat, euclidean(3), 2) == 4


@pytest.mark.parametrize("metric", [euclidean(3), minkowski(3)])
def test_power_form_matches_index_sum(metric, rng):
    for _ in range(5):
        mat = random_symmetric(3, rng)
        vec = [rng.uniform(-2, 2) for _ in range(3)]
        for k in (1, 2, 3, 4):
            got = power_form(vec, mat, metric, k)
            want = brute_power_form(vec, mat, metric.signs, k)
            assert abs(got - want) < 1e-10 * (1.0 + abs(want))


def test_mixed_trace_degenerate_cases(rng):
    u = random_symmetric(3, rng)
    v = random_symmetric(3, rng)
    met = euclidean(3)
    for k in (1, 2, 3):
        assert mixed_power_trace(u, v, met, k, k) == power_trace(u, met, k)
        assert mixed_power_trace(u, v, met, 0, k) == power_trace(v, met, k)


def test_mixed_trace_12_is_entry_sum(rng):
    u = random_symmetric(3, rng)
    v = random_symmetric(3, rng)
    want = sum(u[a][b] * v[b][a] for a in range(3) for b in range(3))
    assert abs(mixed_power_trace(u, v, euclidean(3), 1, 2) - want) < 1e-12


@pytest.mark.parametrize("metric", [euclidean(3), minkowski(3)])
def test_mixed_trace_matches_index_sum(metric, rng):
    u = random_symmetric(3, rng)
    v = random_symmetric(3, rng)
    for k in (1, 2, 3):
        for j in range(k + 1):
            got = mixed_power_trace(u, v, metric, j, k)
            want = brute_mixed_trace(u, v, metric.signs, j, k)
            assert abs(got - want) < 1e-10 * (1.0 + abs(want))


def test_mixed_trace_cyclic_symmetry(rng):
    met = minkowski(4)
    for _ in range(20):
        u = random_symmetric(4, rng)
        v = random_symmetric(4, rng)
        k = rng.randint(1, 4)
        j = rng.randint(0, k)
        a = mixed_power_trace(u, v, met, j, k)
        b = mixed_power_trace(v, u, met, k - j, k)
        assert abs(a - b) < 1e-12 * (1.0 + abs(a))


@pytest.mark.parametrize("n", [2, 3, 4])
def test_power_trace_satisfies_characteristic_recursion(n, rng):
    # S_{n+1} follows from S_1..S_n through the characteristic polynomial
    met = euclidean(n)
    for _ in range(5):
        mat = random_symmetric(n, rng)
        p = [power_trace(mat, met, k) for k in range(1, n + 2)]
        e = [1.0]
        for k in range(1, n + 1):
            acc = 0.0
            for i in range(1, k + 1):
                acc += (-1) ** (i - 1) * e[k - i] * p[i - 1]
            e.append(acc / k)
        want = sum((-1) ** (i - 1) * e[i] * p[n - i] for i in range(1, n + 1))
        assert abs(p[n] - want) < 1e-8 * (1.0 + abs(p[n]))


def test_theta_reduces_at_unit_weight():
    tb = covariant_tensor("theta", 3, lam=1.0)
    p = sample_generic(3, 1, seed=4, positive_fields=True)
    got = tb.build(p)
    grad = p.du[0]
    gg = sum(g * g for g in grad)
    for i in range(3):
        for j in range(3):
            want = p.value(d2_coord(1, i, j))
            if i == j:
                want -= gg / (2.0 * p.u[0])
            assert abs(got[i][j] - want) < 1e-12


def test_minkowski_w_trace_identity():
    # metric trace of the catalog tensor equals the quasilinear combination
    tb = covariant_tensor("w_minkowski", 3)
    met = minkowski(4)
    n = 3
    for seed in range(20):
        p = sample_generic(4, 1, seed=seed)
        w = tb.build(p)
        tr = sum(met.sign(i) * w[i][i] for i in range(4))
        du = p.du[0]
        sq = sum(met.sign(i) * du[i] ** 2 for i in range(4))
        lap = sum(met.sign(i) * p.value(d2_coord(1, i, i)) for i in range(4))
        form = sum(met.sign(i) * met.sign(j) * du[i] * du[j]
                   * p.value(d2_coord(1, i, j))
                   for i in range(4) for j in range(4))
        want = sq * lap / (1.0 - n) - form
        assert abs(tr - want) < 1e-12 * (1.0 + abs(want))


def test_implicit_theta_diagonal_solve():
    p = sample_generic(4, 1, seed=1)
    # zero the off-diagonal spatial Hessian entries
    for a in range(1, 4):
        for b in range(a + 1, 4):
            p = p.replace(d2_coord(1, a, b), 0.0)
    theta = covariant_tensor("implicit_theta", 3).build(p)
    for ai, a in enumerate(range(1, 4)):
        want = p.value(d2_coord(1, a, 0)) / p.value(d2_coord(1, a, a))
        assert abs(theta[ai] - want) < 1e-12


def test_implicit_theta_satisfies_linear_system():
    tb = covariant_tensor("implicit_theta", 3)
    for seed in range(5):
        p = sample_generic(4, 1, seed=seed)
        theta = tb.build(p)
        for b in range(1, 4):
            acc = sum(p.value(d2_coord(1, a, b)) * theta[a - 1]
                      for a in range(1, 4))
            assert abs(acc - p.value(d2_coord(1, b, 0))) < 1e-10


def test_implicit_theta_degenerate_hessian():
    p = sample_generic(4, 1, seed=1)
    for a in range(1, 4):
        for b in range(a, 4):
            p = p.replace(d2_coord(1, a, b), 0.0)
    with pytest.raises(EvaluationError, match="degenerate"):
        covariant_tensor("implicit_theta", 3).build(p)


def test_unknown_tensor_name():
    with pytest.raises(ValueError):
        covariant_tensor("not-a-tensor", 3)


# basis catalog --------------------------------------------------------------


def test_euclid_scalar_count():
    fam = basis(make_spec("AE", 3))
    assert fam.expected_count == 7
    assert len(fam.members) == 7


def test_euclid_two_field_count():
    fam = basis(make_spec("AE", 3, m=2))
    assert fam.expected_count == 17


def test_poincare_two_field_count():
    fam = basis(make_spec("AP", 3, m=2))
    assert fam.expected_count == 24


def test_conformal_scalar_count():
    assert len(basis(make_spec("AC", 3, lam=1.0)).members) == 3
    assert len(basis(make_spec("AC", 3, lam=0.0)).members) == 3


def test_extended_euclid_counts():
    assert len(basis(make_spec("AE1", 3, lam=1.0)).members) == 6
    assert len(basis(make_spec("AE1", 3, lam=0.0)).members) == 6


def test_extended_poincare_branch_counts():
    assert len(basis(make_spec("APtilde", 3, m=2, lam=0.0)).members) == 23
    assert len(basis(make_spec("APtilde", 3, m=2, lam=1.0)).members) == 23


def test_galilei_counts():
    assert len(basis(make_spec("AG_I", 3, rep="log")).members) == 8
    assert len(basis(make_spec("AG1_I", 3, rep="log")).members) == 7
    assert len(basis(make_spec("AG2_I", 3, rep="log")).members) == 6
    assert len(basis(make_spec("AG_I", 3, mu=0.0, rep="log")).members) == 8
    assert len(basis(make_spec("AG_II", 3, rep="log")).members) == 23
    assert len(basis(make_spec("AG1_II", 3, lam=0.5, rep="log")).members) == 22
    assert len(basis(make_spec("AG2_II", 3, rep="log")).members) == 22


def test_galilei_basis_requires_log_rep():
    with pytest.raises(ValueError, match="log"):
        basis(make_spec("AG_I", 3, rep="u"))


def test_massless_complex_needs_projective_family():
    with pytest.raises(ValueError):
        basis(make_spec("AG_II", 3, mass=0.0, rep="log"))


def test_rotation_count():
    fam = basis(make_spec("AO", 3))
    assert len(fam.members) == 10  # u, three traces, three forms, three x-forms


def test_two_matrix_trace_family_count():
    fam = two_matrix_trace_family(3)
    assert len(fam.members) == 9


def test_family_gradients_match_finite_differences():
    cases = [
        basis(make_spec("AE", 3)),
        basis(make_spec("AC", 3, lam=1.0)),
        basis(make_spec("AG_I", 3, rep="log")),
    ]
    for fam in cases:
        point = fam.space.sampler(6)(0)
        for member in fam.members[:4]:
            for cid in member.deps[:6]:
                fd = finite_difference(member, point, cid)
                grad = member.grad(point, (cid,))[0]
                assert abs(grad - fd) <= 1e-6 * (1.0 + abs(fd))


def test_degenerate_point_rank_drop():
    # unit Hessian collapses the Jacobian of the scalar euclid family
    fam = basis(make_spec("AE", 3))
    point = sample_generic(3, 1, seed=2)
    for i in range(3):
        for j in range(i, 3):
            point = point.replace(d2_coord(1, i, j), 1.0 if i == j else 0.0)
    rows = family_jacobian(list(fam.members), point, fam.deps)
    rank, _ = matrix_rank(rows)
    assert rank < 2 * 3


# equation residuals ----------------------------------------------------------


def test_born_infeld_zero_hessian_solution():
    p = sample_generic(4, 1, seed=3)
    for i in range(4):
        for j in range(i, 4):
            p = p.replace(d2_coord(1, i, j), 0.0)
    assert equation_residual("born-infeld", p) == 0.0


def test_eikonal_null_gradient():
    p = sample_generic(4, 1, seed=3)
    for i, val in enumerate((1.0, 1.0, 0.0, 0.0)):
        p = p.replace(d1_coord(1, i), val)
    assert equation_residual("eikonal", p) == 0.0


def test_heat_on_manifold_construction():
    mu = 1.3
    p = sample_generic(4, 1, seed=5)
    lap = sum(p.value(d2_coord(1, a, a)) for a in range(1, 4))
    p = p.replace(d1_coord(1, 0), -lap / (2.0 * mu))
    assert abs(equation_residual("heat", p, mu=mu)) < 1e-14


def test_schrodinger_residual_is_complex():
    p = sample_generic(4, 2, COMPLEX, seed=5)
    val = equation_residual("schrodinger", p, mass=1.0)
    assert isinstance(val, complex)


def test_unknown_equation():
    with pytest.raises(ValueError):
        equation_function("not-an-equation", 3)


def test_galilei_tensor_builders_shape():
    p = sample_generic(4, 1, seed=6)
    vec = covariant_tensor("galilei_theta", 3, mu=1.0).build(p)
    assert len(vec) == 3
    mat = covariant_tensor("galilei_theta2", 3, mu=1.0).build(p)
    assert len(mat) == 3 and all(len(row) == 3 for row in mat)
    for i in range(3):
        for j in range(3):
            assert abs(mat[i][j] - mat[j][i]) < 1e-14
    h = covariant_tensor("galilei_h", 3, mu=1.0).build(p)
    assert len(h) == 3
    hh = covariant_tensor("galilei_hhat_mu0", 3).build(p)
    assert len(hh) == 3


def test_symmetric_tensor_outputs():
    p = sample_generic(4, 1, seed=7, positive_fields=True)
    for name in ("theta_minkowski", "w_minkowski", "eikonal_theta"):
        mat = covariant_tensor(name, 3, lam=1.0).build(p)
        for i in range(4):
            for j in range(4):
                assert abs(mat[i][j] - mat[j][i]) < 1e-12


def test_every_family_member_gradient_matches_finite_differences():
    # full-family sweep at a generic point, a representative family per
    # geometry
    cases = [
        basis(make_spec("AE", 3, m=2)),
        basis(make_spec("AC", 3, lam=2.0)),
        basis(make_spec("AP", 3, m=2)),
        basis(make_spec("AG2_I", 3, rep="log")),
    ]
    for fam in cases:
        for s in range(2):
            point = fam.space.sampler(31)(s)
            for member in fam.members:
                for cid in member.deps[::4]:
                    fd = finite_difference(member, point, cid)
                    grad = member.grad(point, (cid,))[0]
                    assert abs(grad - fd) <= 1e-6 * (1.0 + abs(fd)), (
                        fam.label, member.label, str(cid))


def test_rotation_dilation_family_invariance():
    from invforge.invcat import rotation_dilation_family
    from invforge.liealg import catalog, prolong2
    from invforge.verify import check_absolute

    for lam in (1.0, 0.0):
        fam = rotation_dilation_family(3, 1, lam)
        assert len(fam.members) == 9
        ops = [prolong2(f) for f in catalog(make_spec("AE1", 3, lam=lam))
               if not f.label.startswith("P")]
        rep = check_absolute(ops, fam, n_samples=5, seed=2)
        assert rep.verdict == "PASS"


def test_covariant_tensor_components_convenience():
    from invforge.invcat import covariant_tensor_components

    p = sample_generic(3, 1, seed=3, positive_fields=True)
    mat = covariant_tensor_components("theta", p, lam=1.0)
    assert len(mat) == 3 and len(mat[0]) == 3
    p4 = sample_generic(4, 1, seed=3)
    vec = covariant_tensor_components("implicit_theta", p4)
    assert len(vec) == 3
