import pytest

from invforge.jetspace import (
    COMPLEX,
    REAL,
    JetCoordinateId,
    base_coord,
    contract,
    coord_count,
    d1_coord,
    d2_coord,
    enumerate_coords,
    euclidean,
    field_coord,
    from_log_jets,
    minkowski,
    sample_generic,
    to_log_jets,
)


def test_contract_euclidean():
    assert contract(euclidean(3), (1, 2, 2), (1, 2, 2)) == 9


def test_contract_minkowski_null_vector():
    assert contract(minkowski(4), (1, 1, 0, 0), (1, 1, 0, 0)) == 0


def test_contract_minkowski_timelike():
    assert contract(minkowski(2), (3, 0), (3, 0)) == 9


def test_contract_dimension_mismatch():
    with pytest.raises(ValueError):
        contract(euclidean(3), (1, 2), (1, 2, 3))


@pytest.mark.parametrize("n,m", [(3, 1), (4, 2), (5, 3), (3, 2)])
def test_coordinate_count(n, m):
    coords = enumerate_coords(n, m)
    assert len(coords) == coord_count(n, m)
    assert len(coords) == n + m + m * n + m * n * (n + 1) // 2
    assert len(set(coords)) == len(coords)


def test_count_example():
    assert coord_count(3, 1) == 13


def test_symmetric_second_derivative_storage():
    p = sample_generic(3, 1, seed=0)
    p = p.replace(d2_coord(1, 1, 2), 5.0)
    assert p.value(d2_coord(1, 2, 1)) == 5.0
    assert p.value(d2_coord(1, 1, 2)) == 5.0


def test_symmetric_access_everywhere():
    p = sample_generic(4, 2, seed=3)
    for r in (1, 2):
        for i in range(4):
            for j in range(4):
                assert p.value(d2_coord(r, i, j)) == p.value(d2_coord(r, j, i))


def test_field_read():
    p = sample_generic(3, 1, seed=0).replace(field_coord(1), 7.0)
    assert p.value(field_coord(1)) == 7.0


def test_out_of_range_errors():
    p = sample_generic(3, 1, seed=0)
    with pytest.raises(ValueError):
        p.value(d1_coord(2, 2))
    with pytest.raises(ValueError):
        p.value(base_coord(3))
    with pytest.raises(ValueError):
        p.value(d2_coord(1, 0, 3))


def test_sampling_determinism():
    a = sample_generic(3, 1, seed=1)
    b = sample_generic(3, 1, seed=1)
    assert a == b
    c = sample_generic(3, 1, seed=2)
    assert any(a.value(cid) != c.value(cid) for cid in enumerate_coords(3, 1))


def test_sampling_magnitudes():
    for seed in range(10):
        p = sample_generic(3, 2, seed=seed)
        for cid in enumerate_coords(3, 2):
            assert 0.5 <= abs(p.value(cid)) <= 2.0 * 2**0.5


def test_positive_fields_flag():
    for seed in range(10):
        p = sample_generic(3, 2, seed=seed, positive_fields=True)
        assert all(0.5 <= u <= 2.0 for u in p.u)


def test_complex_sampling_conjugate_slots():
    p = sample_generic(3, 2, COMPLEX, seed=4)
    assert p.u[1] == p.u[0].conjugate()
    for i in range(3):
        assert p.du[1][i] == p.du[0][i].conjugate()
    assert abs(p.u[0]) >= 0.5
    assert p.conjugate_index(1) == 2
    assert p.conjugate_index(2) == 1


def test_real_conjugate_is_identity():
    p = sample_generic(3, 2, REAL, seed=4)
    assert p.conjugate_index(1) == 1


def test_diagonal_hessian_nondegeneracy():
    # generic points must keep the diagonal second derivatives apart
    for seed in range(100):
        p = sample_generic(3, 1, seed=seed)
        diag = [p.value(d2_coord(1, i, i)) for i in range(3)]
        for i in range(3):
            for j in range(i + 1, 3):
                assert abs(diag[i] - diag[j]) > 1e-6


def test_log_jet_round_trip():
    p = sample_generic(3, 1, seed=9, positive_fields=True)
    q = from_log_jets(to_log_jets(p))
    for cid in enumerate_coords(3, 1):
        assert abs(p.value(cid) - q.value(cid)) < 1e-12


def test_log_jet_chain_rule():
    import math

    p = sample_generic(2, 1, seed=5, positive_fields=True)
    lp = to_log_jets(p)
    u = p.u[0]
    assert abs(lp.u[0] - math.log(u)) < 1e-14
    assert abs(lp.du[0][0] - p.du[0][0] / u) < 1e-14
    got = lp.value(d2_coord(1, 0, 1))
    want = p.value(d2_coord(1, 0, 1)) / u - p.du[0][0] * p.du[0][1] / u**2
    assert abs(got - want) < 1e-14
