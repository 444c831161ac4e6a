import itertools

import numpy as np
import pytest

from smallsphere.tensor import (
    METRIC, CurvatureError, ElectricMagneticParts, Observer, bel_robinson, classify,
    electric_magnetic_from_weyl, null_condition_parts, q_contract, random_vacuum,
    riemann_from_weyl_ricci, v_vector, validate_riemann, weyl_from_electric_magnetic,
)


def em(D, E=None):
    return weyl_from_electric_magnetic(ElectricMagneticParts(np.asarray(D, float),
                                                             np.zeros((3, 3)) if E is None else E))


def test_zero_tensor_is_valid_vacuum():
    c = validate_riemann(np.zeros((4, 4, 4, 4)))
    assert c.is_vacuum
    assert not np.any(c.ricci)


def test_lone_component_breaks_antisymmetry():
    R = np.zeros((4, 4, 4, 4))
    R[0, 1, 0, 1] = 1.0
    with pytest.raises(CurvatureError, match="antisymmetry"):
        validate_riemann(R)


def test_bianchi_violation_is_named():
    R = np.zeros((4, 4, 4, 4))
    for (a, b, c, d), s in (((0, 1, 2, 3), 1), ((1, 0, 2, 3), -1), ((0, 1, 3, 2), -1), ((1, 0, 3, 2), 1)):
        R[a, b, c, d] = s
        R[c, d, a, b] = s
    with pytest.raises(CurvatureError, match="first Bianchi"):
        validate_riemann(R)


def test_bad_shape_and_nonfinite():
    with pytest.raises(CurvatureError):
        validate_riemann(np.zeros((3, 3, 3, 3)))
    R = np.zeros((4, 4, 4, 4))
    R[0, 0, 0, 0] = np.nan
    with pytest.raises(CurvatureError):
        validate_riemann(R)


def test_reconstructed_weyl_round_trips_through_validation(rng):
    c = random_vacuum(rng)
    again = validate_riemann(np.array(c.riemann))
    assert again.is_vacuum
    assert np.array_equal(again.riemann, c.riemann)


def test_electric_example_traces(electric):
    W = electric.riemann
    assert np.sum(W[0, 1:, 0, 1:] ** 2) == pytest.approx(6.0, abs=1e-14)
    g = METRIC
    for trace in (np.einsum("ac,abcd->bd", g, W), np.einsum("ad,abcd->bc", g, W), np.einsum("bd,abcd->ac", g, W)):
        assert np.abs(trace).max() <= 1e-14


def test_zero_parts_give_zero_tensor():
    assert not np.any(em(np.zeros((3, 3))).riemann)


def test_null_condition_pair_is_valid():
    c = weyl_from_electric_magnetic(null_condition_parts(1.0))
    assert c.is_vacuum
    validate_riemann(np.array(c.riemann))


@pytest.mark.parametrize("D,E", [
    (np.array([[1.0, 2.0, 0], [0, -1.0, 0], [0, 0, 0]]), np.zeros((3, 3))),
    (np.diag([1.0, 1.0, 1.0]), np.zeros((3, 3))),
    (np.zeros((3, 3)), np.diag([1.0, 0, 0])),
])
def test_em_parts_reject_bad_input(D, E):
    with pytest.raises(CurvatureError):
        ElectricMagneticParts(D, E)


def test_em_round_trip(rng):
    for _ in range(20):
        c = random_vacuum(rng)
        parts = electric_magnetic_from_weyl(c)
        again = weyl_from_electric_magnetic(parts)
        assert np.abs(again.riemann - c.riemann).max() <= 1e-14 * max(1.0, np.abs(c.riemann).max())
        back = electric_magnetic_from_weyl(again)
        assert np.abs(back.D - parts.D).max() <= 1e-14
        assert np.abs(back.E - parts.E).max() <= 1e-14


def test_em_extraction_of_zero_and_null_pair():
    z = electric_magnetic_from_weyl(validate_riemann(np.zeros((4, 4, 4, 4))))
    assert not np.any(z.D) and not np.any(z.E)
    parts = electric_magnetic_from_weyl(weyl_from_electric_magnetic(null_condition_parts(2.0)))
    assert np.allclose(parts.D, np.diag([0.0, 2.0, -2.0]), atol=1e-14)


def test_magnetic_convention(rng):
    c = random_vacuum(rng)
    E = electric_magnetic_from_weyl(c).E
    eps = np.zeros((3, 3, 3))
    for p in itertools.permutations(range(3)):
        eps[p] = np.linalg.det(np.eye(3)[list(p)])
    assert np.allclose(c.riemann[0, 1:, 1:, 1:], np.einsum("jkn,in->ijk", eps, E), atol=1e-14)


def test_non_vacuum_rejected(rng):
    ric = np.diag([1.0, 0.5, 0.5, 0.5])
    c = validate_riemann(riemann_from_weyl_ricci(random_vacuum(rng).riemann, ric))
    assert not c.is_vacuum
    assert np.allclose(c.ricci, ric, atol=1e-13)
    for op in (electric_magnetic_from_weyl, bel_robinson, v_vector):
        with pytest.raises(CurvatureError):
            op(c)
    with pytest.raises(CurvatureError):
        q_contract(c, Observer())


def test_bel_robinson_zero():
    assert not np.any(bel_robinson(validate_riemann(np.zeros((4, 4, 4, 4)))).q)


def test_bel_robinson_energy_density(rng):
    for _ in range(10):
        c = random_vacuum(rng)
        W = c.riemann
        expected = 0.5 * np.sum(W[0, 1:, 1:, 1:] ** 2) + np.sum(W[0, 1:, 0, 1:] ** 2)
        assert bel_robinson(c).q[0, 0, 0, 0] == pytest.approx(expected, rel=1e-12)


def test_bel_robinson_electric_brute_force(electric):
    magnetic = sum(electric.riemann[0, k, m, n] ** 2 for k in range(1, 4) for m in range(1, 4) for n in range(1, 4))
    assert bel_robinson(electric).q[0, 0, 0, 0] == pytest.approx(0.5 * magnetic + 6.0, abs=1e-13)


def test_bel_robinson_symmetric_and_consistent(rng):
    for _ in range(10):
        c = random_vacuum(rng)
        q = bel_robinson(c).q
        for p in itertools.permutations(range(4)):
            assert np.abs(q - q.transpose(p)).max() <= 1e-12 * np.abs(q).max()
        t0 = Observer(rng.normal(size=3))
        full = np.einsum("abcd,a,b,c,d->", q, *[np.eye(4)[0]] * 3, np.concatenate([[t0.a0], t0.a]))
        assert q_contract(c, t0) == pytest.approx(full, rel=1e-12)


def test_q_contract_examples(electric):
    zero = validate_riemann(np.zeros((4, 4, 4, 4)))
    assert q_contract(zero, Observer([0.3, -1.0, 2.0])) == 0.0
    assert q_contract(electric, Observer()) == pytest.approx(6.0, abs=1e-14)
    assert q_contract(weyl_from_electric_magnetic(null_condition_parts(1.0)), Observer()) == pytest.approx(4.0)


def test_v_vector_classes(electric):
    assert v_vector(validate_riemann(np.zeros((4, 4, 4, 4)))).kind == "zero"
    for b in (0.1, 1.0, 3.0, -2.0):
        v = v_vector(weyl_from_electric_magnetic(null_condition_parts(b)))
        assert v.kind == "null-future"
    v = v_vector(electric)
    assert v.kind == "timelike-future"
    assert np.array_equal(v.components[1:], np.zeros(3))


def test_v_never_spacelike():
    rng = np.random.default_rng(1)
    for _ in range(1000):
        v = v_vector(random_vacuum(rng, scale=rng.uniform(0.1, 10.0)))
        V0, Vi = v.components[0], v.components[1:]
        assert V0 ** 2 - Vi @ Vi >= -1e-10 * V0 ** 2
        assert v.kind in ("timelike-future", "null-future")


def test_classify():
    assert classify([0, 0, 0, 0]).kind == "zero"
    assert classify([1, 2, 0, 0]).kind == "spacelike"
    assert classify([-1, 0, 0, 0]).kind == "timelike-past"
    assert classify([-1, 1, 0, 0]).kind == "null-past"
    assert classify([2, 0, 0, 0]).norm2 == -4.0


def test_observer():
    t0 = Observer([3.0, 0.0, 4.0])
    assert t0.a0 == pytest.approx(np.sqrt(26.0))
    assert np.allclose(t0.vector, [np.sqrt(26.0), -3.0, 0.0, -4.0])
    assert t0.vector @ METRIC @ t0.vector == pytest.approx(-1.0)
    with pytest.raises(ValueError):
        Observer([np.inf, 0.0, 0.0])
