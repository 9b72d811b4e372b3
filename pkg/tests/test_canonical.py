import math
import random

import numpy as np
import pytest
import sympy as sp

from killingweb.canonical import (SeparableChart, canonical_residual, canonical_web_tensor,
                                  chart_map, chart_pushforward_check, sample_chart_point,
                                  symmetric_eig3, to_canonical)
from killingweb.charts import catalog_jacobian, catalog_point
from killingweb.classify import ConsistencyError, DomainError, WebClass as W
from killingweb.exactmath import UsageError
from killingweb.killing import (KTParams, apply_isometry, has_distinct_eigenvalues,
                                random_isometry)
from killingweb.pipeline import compatibility_space
from killingweb.potential import parse_potential
from support import CM_POTENTIAL, expected_essential, random_canonical

def test_circular_cylindrical_axis_offset():
    K = KTParams.from_named(a1=10, a2=5, a3=2, alpha3=6, b13=3, b23=2, c3=1)
    chart = to_canonical(K)
    assert chart.web == W.CIRCULAR_CYLINDRICAL
    assert chart.frame.delta[:2] == (2, -3)
    # the rotation angle is free, identity is kept
    assert np.allclose(np.array(chart.frame.lam, dtype=float), np.eye(3))


def test_spherical_centre_on_axis():
    K = KTParams.from_named(a1=9, a2=9, a3=1, b12=4, b21=-4, c1=2, c2=2, c3=5)
    chart = to_canonical(K)
    assert chart.web == W.SPHERICAL
    assert tuple(chart.frame.delta) == (0, 0, 2)


def test_cm_spheroidal_focal_distance():
    g, K1, K2, K3, K4 = compatibility_space(parse_potential(CM_POTENTIAL)).basis
    for K, web in ((K3 + K1, W.PROLATE_SPHEROIDAL), (K3 - K1, W.OBLATE_SPHEROIDAL)):
        chart = to_canonical(K)
        assert chart.web == web
        assert abs(chart.essential["a"] - math.sqrt(3)) < 1e-9


# ------------------------------------------------------------------ charts

def test_chart_map_examples():
    c = chart_map(SeparableChart.standard(W.CIRCULAR_CYLINDRICAL), (1, 0, 5))
    assert np.allclose(c, (1, 0, 5), atol=1e-15)
    s = chart_map(SeparableChart.standard(W.SPHERICAL), (2, math.pi / 2, 0))
    assert np.allclose(s, (2, 0, 0), atol=1e-15)


def test_chart_map_applies_frame():
    h = random_isometry(random.Random(3))
    chart = SeparableChart(W.CARTESIAN, {}, h, KTParams.zero(), 0.0)
    lam = np.array(h.lam, dtype=float)
    assert np.allclose(chart_map(chart, (1, 2, 3)), lam @ [1, 2, 3] + np.array(h.delta, dtype=float))


_GAUGE = {W.ELLIPTIC_HYPERBOLIC: {"a": 1.3}, W.PROLATE_SPHEROIDAL: {"a": 0.7},
          W.OBLATE_SPHEROIDAL: {"a": 2.0}, W.CONICAL: {"b": 0.6, "c": 1.0},
          W.PARABOLOIDAL: {"b": 2.0, "c": 1.0}, W.ELLIPSOIDAL: {"a": 3.0, "b": 2.0, "c": 1.0}}


@pytest.mark.parametrize("web", list(W))
def test_metric_is_diagonal_in_every_chart(web):
    chart = SeparableChart.standard(web, _GAUGE.get(web))
    rng = np.random.default_rng(0)
    for _ in range(10):
        u = sample_chart_point(chart, rng)
        assert chart_pushforward_check(KTParams.metric(), chart, u) < 1e-8


@pytest.mark.parametrize("web", list(W))
def test_canonical_tensor_diagonal_in_own_chart(web):
    rng = random.Random(11)
    nrng = np.random.default_rng(11)
    K, _ = random_canonical(web, rng)
    while not has_distinct_eigenvalues(K):
        K, _ = random_canonical(web, rng)
    chart = to_canonical(K)
    for k, v in expected_essential(web, K).items():
        assert abs(chart.essential[k] - v) <= 1e-12 * abs(v)
    for _ in range(20):
        u = sample_chart_point(chart, nrng)
        assert chart_pushforward_check(K, chart, u) < 1e-8


def _chart_sympy(web, e, signs):
    """Cartesian point of each catalog chart as sympy expressions in u1, u2, u3."""
    u1, u2, u3 = u = sp.symbols("u1:4")
    e = {k: sp.Rational(str(v)) for k, v in (e or {}).items()}
    cos, sin, cosh, sinh = sp.cos, sp.sin, sp.cosh, sp.sinh
    if web == W.CARTESIAN:
        return u, [u1, u2, u3]
    if web == W.CIRCULAR_CYLINDRICAL:
        return u, [u1 * cos(u2), u1 * sin(u2), u3]
    if web == W.PARABOLIC_CYLINDRICAL:
        return u, [(u1 ** 2 - u2 ** 2) / 2, u1 * u2, u3]
    if web == W.ELLIPTIC_HYPERBOLIC:
        return u, [e["a"] * cosh(u1) * cos(u2), e["a"] * sinh(u1) * sin(u2), u3]
    if web == W.SPHERICAL:
        return u, [u1 * sin(u2) * cos(u3), u1 * sin(u2) * sin(u3), u1 * cos(u2)]
    if web == W.PROLATE_SPHEROIDAL:
        a = e["a"]
        return u, [a * sinh(u1) * sin(u2) * cos(u3), a * sinh(u1) * sin(u2) * sin(u3),
                   a * cosh(u1) * cos(u2)]
    if web == W.OBLATE_SPHEROIDAL:
        a = e["a"]
        return u, [a * cosh(u1) * sin(u2) * cos(u3), a * cosh(u1) * sin(u2) * sin(u3),
                   a * sinh(u1) * cos(u2)]
    if web == W.PARABOLIC:
        return u, [u1 * u2 * cos(u3), u1 * u2 * sin(u3), (u1 ** 2 - u2 ** 2) / 2]
    if web == W.CONICAL:
        b, c = e["b"], e["c"]
        x2 = [(u1 * u2 * u3 / (b * c)) ** 2,
              u1 ** 2 * (u2 ** 2 - b ** 2) * (b ** 2 - u3 ** 2) / (b ** 2 * (c ** 2 - b ** 2)),
              u1 ** 2 * (c ** 2 - u2 ** 2) * (c ** 2 - u3 ** 2) / (c ** 2 * (c ** 2 - b ** 2))]
    elif web == W.PARABOLOIDAL:
        b, c = e["b"], e["c"]
        x2 = [4 * (u1 - b) * (b - u2) * (b - u3) / (b - c),
              4 * (u1 - c) * (c - u2) * (u3 - c) / (b - c)]
    else:
        a, b, c = e["a"], e["b"], e["c"]
        x2 = [(a - u1) * (a - u2) * (a - u3) / ((a - b) * (a - c)),
              (b - u1) * (b - u2) * (b - u3) / ((b - a) * (b - c)),
              (c - u1) * (c - u2) * (c - u3) / ((c - a) * (c - b))]
    X = [s * sp.sqrt(q) for s, q in zip(signs, x2)]
    if web == W.PARABOLOIDAL:
        X.append(u1 + u2 + u3 - b - c)
    return u, X


@pytest.mark.parametrize("web", list(W))
def test_exact_jacobian_matches_sympy(web):
    e = _GAUGE.get(web)
    signs = (1, -1, 1)
    u, X = _chart_sympy(web, e, signs)
    J = sp.Matrix(X).jacobian(u)
    rng = np.random.default_rng(2)
    for _ in range(5):
        p = sample_chart_point(SeparableChart.standard(web, e), rng)
        at = dict(zip(u, p))
        point = np.array(sp.Matrix(X).subs(at).evalf(20), dtype=float).ravel()
        assert np.allclose(catalog_point(web, p, e, signs), point, rtol=1e-12, atol=1e-12)
        ref = np.array(J.subs(at).evalf(20), dtype=float)
        assert np.allclose(catalog_jacobian(web, p, e, signs), ref, rtol=1e-12, atol=1e-12)


def test_wrong_chart_is_not_diagonal():
    K = KTParams.from_named(a1=1, a2=1, a3=1, c1=2, c2=2, c3=5)
    chart = SeparableChart.standard(W.CARTESIAN)
    assert chart_pushforward_check(K, chart, (0.4, 0.7, -0.3)) > 1e-2


def test_chart_domain_is_checked():
    chart = SeparableChart.standard(W.ELLIPSOIDAL, {"a": 3, "b": 2, "c": 1})
    with pytest.raises(UsageError):
        chart_map(chart, (1.5, 2.5, 0.0))
    with pytest.raises(UsageError):
        chart_map(SeparableChart.standard(W.CONICAL), (1, 1, 1))


# ----------------------------------------------------------- eigenvectors

def test_symmetric_eig3_examples():
    w, V = symmetric_eig3(np.eye(3))
    assert np.allclose(w, 1) and np.allclose(V, np.eye(3))
    w, V = symmetric_eig3(np.diag([3.0, 1.0, 2.0]))
    assert np.allclose(w, [1, 2, 3])
    assert np.linalg.det(V) > 0
    with pytest.raises(UsageError):
        symmetric_eig3([[1, 2, 0], [0, 1, 0], [0, 0, 1]])


def test_symmetric_eig3_against_characteristic_roots():
    rng = np.random.default_rng(4)
    for _ in range(20):
        A = rng.integers(-5, 6, (3, 3)).astype(float)
        A = A + A.T
        w, V = symmetric_eig3(A)
        M = sp.Matrix(A.astype(int).tolist())
        roots = sorted(float(sp.re(r)) for r in sp.Poly(M.charpoly()).nroots(n=30))
        assert np.allclose(w, roots, atol=1e-9)
        assert np.allclose(A @ V, V * w, atol=1e-9)
        assert np.allclose(V.T @ V, np.eye(3), atol=1e-12)


def test_symmetric_eig3_degenerate_cluster_is_stable():
    R = np.array(random_isometry(random.Random(8)).to_float().lam, dtype=float)
    A = R @ np.diag([1.0, 1.0, 4.0]) @ R.T
    w1, V1 = symmetric_eig3(A)
    w2, V2 = symmetric_eig3(A + 1e-13 * np.eye(3))
    assert np.allclose(V1, V2, atol=1e-9)


# ------------------------------------------------------- canonical tensors

def test_canonical_web_tensor_examples():
    K = canonical_web_tensor(W.CARTESIAN, {"a1": 1, "a2": 2, "a3": 3})
    assert K == KTParams.from_named(a1=1, a2=2, a3=3)
    K = canonical_web_tensor(W.PARABOLIC, {"a1": 2, "b12": 1, "c3": 5})
    assert K == KTParams.from_named(a1=2, a2=2, a3=2, b12=1, b21=-1, c3=5)
    assert canonical_residual(K, W.PARABOLIC) == 0


@pytest.mark.parametrize("web,params", [
    (W.CIRCULAR_CYLINDRICAL, {"a1": 1, "a3": 2, "c3": 0}),
    (W.ELLIPTIC_HYPERBOLIC, {"a1": 1, "a2": 2, "a3": 0, "c3": 1}),
    (W.PROLATE_SPHEROIDAL, {"a1": 2, "a3": 1, "c2": 1, "c3": 0}),
    (W.OBLATE_SPHEROIDAL, {"a1": 1, "a3": 2, "c2": 1, "c3": 0}),
    (W.CONICAL, {"a1": 0, "c1": 1, "c2": 1, "c3": 2}),
    (W.PARABOLOIDAL, {"a1": 1, "a2": 2, "a3": 3, "b12": 1, "b21": 1, "c3": 1}),
    (W.ELLIPSOIDAL, {"a1": 1, "a2": 2, "a3": 3, "c1": 1, "c2": 2, "c3": 3}),
])
def test_constraint_violations(web, params):
    with pytest.raises(DomainError):
        canonical_web_tensor(web, params)


def test_unknown_parameter_rejected():
    with pytest.raises(UsageError):
        canonical_web_tensor(W.CARTESIAN, {"c3": 1})


def test_recovered_asymmetric_forms_satisfy_constraints():
    rng = random.Random(12)
    for _ in range(10):
        K, _ = random_canonical(W.PARABOLOIDAL, rng)
        n = to_canonical(apply_isometry(K, random_isometry(rng))).canonical.to_float().named()
        b12, b21, c3 = n["b12"], n["b21"], n["c3"]
        lhs = b12 * (b12 * b21 + c3 * (n["a2"] - n["a3"])) + b21 * (b12 * b21 + c3 * (n["a1"] - n["a3"]))
        scale = max(abs(v) for v in n.values()) ** 3
        assert abs(lhs) < 1e-9 * scale

        K, _ = random_canonical(W.ELLIPSOIDAL, rng)
        n = to_canonical(apply_isometry(K, random_isometry(rng))).canonical.to_float().named()
        a1, a2, a3, c1, c2, c3 = (n[k] for k in ("a1", "a2", "a3", "c1", "c2", "c3"))
        lhs = (a1 - a2) * c1 * c2 + (a2 - a3) * c2 * c3 + (a3 - a1) * c3 * c1
        scale = max(abs(v) for v in n.values()) ** 3
        assert abs(lhs) < 1e-9 * scale


def test_expected_web_mismatch():
    K = KTParams.from_named(a1=1, a2=1, a3=1, c1=2, c2=2, c3=5)
    with pytest.raises(ConsistencyError):
        to_canonical(K, web=W.CARTESIAN)


def test_chart_json_shape():
    chart = to_canonical(KTParams.from_named(a1=1, a2=1, a3=1, c1=2, c2=2, c3=5))
    d = chart.to_json()
    assert {"web", "lambda", "delta", "essential", "canonical"} <= set(d)
    assert d["web"] == "SPHERICAL"
