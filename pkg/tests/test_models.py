import numpy as np
import pytest

from gpw.models import (
    HYPERBOLIC,
    AlphaFamily,
    ClassViolation,
    Kind,
    alpha,
    alpha_of_profile,
    alpha_sequence,
    block_form,
    build_isometry,
    classify,
    g0_member,
    g1_member,
    group_dimension,
    model_at,
    normalize_to_V,
    random_g0,
    random_g1,
    solve_alpha2_ode,
    u0_frame_model,
    u0_model,
    u1_model,
)
from gpw.smoothfn import ExpSum, PowerTranslate, UnrepresentableError, parse


def test_model_values_of_square_profile():
    assert model_at(parse("poly:0,0,1"), 0.0, K=2).values() == [2.0, 0.0, 0.0]


def test_model_values_of_exponential():
    assert model_at(parse("exp:1@1"), 0.0, K=5).values() == [1.0] * 6


def test_model_frame_is_hyperbolic():
    M = model_at(parse("poly:0,0,1"), 1.3)
    assert np.array_equal(M.inner, HYPERBOLIC)


def test_u0_normalization(curved_f, rng):
    for _ in range(5):
        y = rng.uniform(0.1, 1.5)
        M = u0_frame_model(curved_f, y)
        assert M.distance(u0_model()) <= 1e-12


def test_v_model_of_exponential():
    M = normalize_to_V(parse("exp:2@3"), 0.4, K=6)
    assert np.allclose(M.values(), 1.0, atol=1e-12)
    assert M.truncate(1).distance(u1_model()) <= 1e-12


def test_v_model_of_quadratic_second_derivative():
    M = normalize_to_V(parse("poly:0,0,0,0,1"), 1.0, K=3)
    assert M.values() == pytest.approx([1.0, 1.0, 0.5, 0.0], abs=1e-12)


def test_v_model_rejects_square_profile():
    with pytest.raises(ClassViolation):
        normalize_to_V(parse("poly:0,0,1"), 0.0)


def test_v_model_with_negative_second_derivative():
    M = normalize_to_V(parse("exp:-1@1"), 0.2, K=3)
    assert M.sign_flag == -1
    assert M.values() == pytest.approx([-1.0, -1.0, -1.0, -1.0], abs=1e-12)


def test_alpha_examples():
    f = parse("poly:0,0,0,0,1")
    assert alpha(f, 1.0, 2) == 0.5
    assert alpha(f, 1.0, 3) == 0.0


@pytest.mark.parametrize("a, lam", [(1.0, 1.0), (-2.0, 0.5), (3.0, -1.5)])
def test_alpha_is_one_for_exponential(a, lam):
    f = ExpSum(((a / lam**2, lam),))
    for y in np.linspace(-1, 1, 5):
        assert alpha_sequence(f, y, 8) == pytest.approx([1.0] * 7, abs=1e-12)


def test_alpha_of_profile_agrees_with_alpha():
    f = parse("exp:1@1+1@2")
    h = parse("exp:1@1+4@2")
    for p in range(2, 6):
        assert alpha_of_profile(h, 0.3, p) == pytest.approx(alpha(f, 0.3, p), rel=1e-13)


def test_membership_examples():
    assert g0_member(np.eye(4)) and g1_member(np.eye(4))
    rot = block_form(np.eye(2), [[0, 1], [-1, 0]])
    assert g0_member(rot) and g1_member(rot)
    squeeze = block_form(np.diag([2.0, 0.5]), np.zeros((2, 2)))
    assert g0_member(squeeze)
    assert not g1_member(squeeze)


def test_reflection_component_of_g1():
    T = block_form(np.diag([-1.0, 1.0]), np.zeros((2, 2)))
    assert g1_member(T)
    assert u1_model().transformed(T).distance(u1_model()) <= 1e-15
    assert not g1_member(T, identity_component=True)


def test_group_dimensions():
    assert group_dimension("G0") == 4
    assert group_dimension("G1") == 2
    assert group_dimension("metric") == 6


def test_random_members_and_perturbations(rng):
    for _ in range(20):
        T = random_g0(rng)
        assert g0_member(T)
        E = np.zeros((4, 4))
        E[rng.integers(4), rng.integers(4)] = 1e-3
        assert not g0_member(T + E)
        S = random_g1(rng, identity_component=False)
        assert g1_member(S)


@pytest.mark.parametrize(
    "dsl, kind",
    [
        ("poly:0", Kind.FLAT),
        ("poly:1,2", Kind.FLAT),
        ("poly:0,0,1", Kind.SYMMETRIC),
        ("exp:1@1", Kind.HOMOGENEOUS),
        ("sum:(exp:2@-1)|(poly:0,3)", Kind.HOMOGENEOUS),
        ("poly:0,0,0,0,1", Kind.POWER),
        ("exp:1@1+1@2", Kind.GENERIC),
    ],
)
def test_classify(dsl, kind):
    assert classify(parse(dsl)).kind is kind


def test_classify_power_parameters():
    assert classify(parse("poly:0,0,0,0,1")).params == {"a": 12.0, "b": 0.0, "c": 2.0}
    c = classify(PowerTranslate(1.0, 1.0, 2.5))
    assert c.kind is Kind.POWER
    assert c.params["c"] == pytest.approx(0.5)


def test_generic_witness_flag():
    w = classify(parse("exp:1@1+1@2")).witness
    assert w["one_curvature_homogeneous"] is True
    assert w["structural"] == w["numeric"] == "Generic"


@pytest.mark.parametrize("k, kind, c", [(1, "exponential", None), (0.5, "power", 2.0), (0, "power", 1.0), (2, "power", -1.0)])
def test_solve_alpha2_ode(k, kind, c):
    fam = solve_alpha2_ode(k)
    assert fam.kind == kind
    assert fam.c == c


@pytest.mark.parametrize("k", [0.0, 0.5, 1.0, 2.0, -1.0])
def test_alpha2_round_trip_through_profile(k):
    h = solve_alpha2_ode(k).profile(a=1.5, shift=0.7)
    for y in (0.1, 0.6, 1.3):
        assert alpha_of_profile(h, y, 2) == pytest.approx(k, abs=1e-12)


def test_unrepresentable_family_members():
    with pytest.raises(UnrepresentableError):
        AlphaFamily(2.0, "power", -1.0).metric_function()


def test_isometry_between_exponentials():
    res = build_isometry(parse("exp:1@1"), 0.0, parse("exp:2@3"), 5.0, K=8)
    assert res.success
    assert res.residual <= 1e-6
    P1 = np.array([0.0, 0.0, 0.0, 0.0])
    assert np.allclose(res(P1)[0], [0.0, 5.0, 0.0, 0.0], atol=1e-12)


def test_isometry_mismatch():
    res = build_isometry(parse("exp:1@1"), 0.3, parse("exp:1@1+1@2"), 0.3, K=4)
    assert res.status == "mismatch"
    assert res.mismatch_p == 2


def test_isometry_identity():
    f = parse("poly:0,0,0,0,1")
    res = build_isometry(f, 1.0, f, 1.0, K=4)
    assert res.success
    assert np.allclose(res.frame_map, np.eye(4), atol=1e-15)
    assert res.residual <= 1e-9
