import random
from fractions import Fraction as F

import pytest
import sympy as sp

from killingweb.classify import WebClass as W
from killingweb.exactmath import UsageError
from killingweb.invariants import (delta_polynomials, extract_bii, full_invariants, kv_invariants,
                                   rotational_invariants, translational_invariants, xi_from_tensor,
                                   xi_invariants)
from killingweb.killing import (Isometry, KTParams, KVParams, apply_isometry, cayley_rotation,
                                random_isometry, random_kt)
from support import random_canonical, rat, translational_preform


def test_kv_invariants():
    assert kv_invariants(KVParams((0, 0, 1), (0, 0, 0))).values == (0, 0)
    assert kv_invariants(KVParams((0, 0, 0), (0, 0, 1))).values == (1, 0)
    assert kv_invariants(KVParams((0, 0, 2), (0, 0, 3))).values == (9, 6)


def test_extract_bii():
    assert extract_bii((0, 0, 0)) == (0, 0, 0)
    assert extract_bii((2, -1, -1)) == (0, 1, -1)
    with pytest.raises(UsageError):
        extract_bii((1, 1, 1))


def test_extract_bii_inverts_beta():
    rng = random.Random(0)
    for _ in range(10):
        b = [rat(rng) for _ in range(3)]
        b11, b22, b33 = extract_bii((b[1] - b[2], b[2] - b[0], b[0] - b[1]))
        assert (b22 - b33, b33 - b11, b11 - b22) == (b[1] - b[2], b[2] - b[0], b[0] - b[1])
        assert b11 + b22 + b33 == 0


def test_full_invariants_diagonal_c():
    d = full_invariants(KTParams.from_named(c1=1, c2=2, c3=3)).values
    assert (d[0], d[1], d[3], d[6]) == (0, 6, 14, 36)
    assert all(d[i] == 0 for i in range(15) if i not in (1, 3, 6))


def test_constant_tensor_invariants_vanish():
    assert all(v == 0 for v in full_invariants(KTParams.metric()).values)
    assert all(v == 0 for v in full_invariants(KTParams.from_named(a1=3, a2=-1, alpha1=2)).values)


def test_power_traces_of_c():
    rng = random.Random(3)
    K = random_kt(rng)
    C = sp.Matrix(3, 3, lambda i, j: sp.Rational(F(K.C[i][j]).numerator, F(K.C[i][j]).denominator))
    d = full_invariants(K).values
    assert (d[1], d[3], d[6]) == (C.trace(), (C ** 2).trace(), (C ** 3).trace())


def test_delta_polynomials_evaluate_to_full_invariants():
    polys = delta_polynomials()
    K = random_kt(random.Random(4))
    point = K.named()
    assert tuple(p.evaluate(point) for p in polys) == full_invariants(K).values


def test_selected_subset():
    inv = full_invariants(random_kt(random.Random(6)), which=[2, 4])
    assert inv.values[0] is None and inv.values[1] is not None and inv.values[3] is not None


# ----------------------------------------------------------- aligned forms

def test_translational_invariants_of_canonical_forms():
    assert translational_invariants(KTParams.from_named(a1=1, a2=2, a3=3)).values == (0, 0)
    b23 = F(3, 2)
    K = KTParams.from_named(a1=1, a2=1, a3=4, b23=b23)
    assert translational_invariants(K).values == (0, b23 ** 4)
    K = KTParams.from_named(a1=2, a2=2, a3=-1, c3=5)
    assert translational_invariants(K).values == (5, 0)


def test_translational_invariants_need_the_form():
    with pytest.raises(UsageError):
        translational_invariants(KTParams.from_named(a1=1, c1=1))


def test_rotational_invariants_of_canonical_forms():
    v = rotational_invariants(KTParams.from_named(a1=1, a2=1, a3=1, c1=2, c2=2, c3=7)).values
    assert v[:2] == (2, 0)
    v = rotational_invariants(KTParams.from_named(a1=1, a2=1, a3=1, b12=3, b21=-3, c3=1)).values
    assert v[:2] == (0, 9)
    rng = random.Random(1)
    for _ in range(10):
        K, _ = random_canonical(W.PROLATE_SPHEROIDAL, rng)
        assert rotational_invariants(K).values[1] > 0
        K, _ = random_canonical(W.OBLATE_SPHEROIDAL, rng)
        assert rotational_invariants(K).values[1] < 0


def _about_z(rng):
    t = F(rng.randint(-5, 5), rng.randint(1, 4))
    return cayley_rotation([[0, t, 0], [-t, 0, 0], [0, 0, 0]])


def test_aligned_invariants_respect_residual_motions():
    rng = random.Random(2)
    for _ in range(10):
        K = translational_preform(rng, alpha1=0, alpha2=0, beta1=0)
        h = Isometry(_about_z(rng), (rat(rng), rat(rng), rat(rng)))
        assert translational_invariants(apply_isometry(K, h)).values == translational_invariants(K).values
        K, _ = random_canonical(W.PROLATE_SPHEROIDAL, rng)
        K = apply_isometry(K, Isometry(((1, 0, 0), (0, 1, 0), (0, 0, 1)), (0, 0, rat(rng))))
        h = Isometry(_about_z(rng), (0, 0, rat(rng)))
        assert rotational_invariants(apply_isometry(K, h)).values[:2] == rotational_invariants(K).values[:2]


# ------------------------------------------------------------------- Xi

def test_paraboloidal_xi12_vanish():
    rng = random.Random(5)
    for _ in range(10):
        K, _ = random_canonical(W.PARABOLOIDAL, rng)
        x = xi_from_tensor(apply_isometry(K, random_isometry(rng))).values
        assert x[0] == 0 and x[1] == 0


def test_conical_xi456_vanish():
    rng = random.Random(6)
    for _ in range(10):
        K, _ = random_canonical(W.CONICAL, rng)
        x = xi_from_tensor(K).values
        assert x[2] != 0 and x[3:] == (0, 0, 0)


def test_ellipsoidal_xi_match_closed_forms():
    rng = random.Random(7)
    for _ in range(10):
        K, p = random_canonical(W.ELLIPSOIDAL, rng)
        a1, a2, a3, c1, c2, c3 = (p[k] for k in ("a1", "a2", "a3", "c1", "c2", "c3"))
        x4 = (a1 + a2 - 2 * a3) * c1 * c2 + (a2 + a3 - 2 * a1) * c2 * c3 + (a3 + a1 - 2 * a2) * c3 * c1
        x5 = (c1 * c2 + c2 * c3 + c3 * c1) * ((a1 + a2 - 2 * a3) * c3 + (a2 + a3 - 2 * a1) * c1
                                              + (a3 + a1 - 2 * a2) * c2)
        x6 = 12 * c1 * c2 * c3 * ((2 * a1 - a2 - a3) * c1 + (2 * a2 - a3 - a1) * c2
                                  + (2 * a3 - a1 - a2) * c3)
        x = xi_from_tensor(apply_isometry(K, random_isometry(rng))).values
        assert x[3:] == (x4, x5, x6)
        assert x[2] == (c1 - c2) ** 2 + (c2 - c3) ** 2 + (c3 - c1) ** 2
        assert x[3:] != (0, 0, 0)


def test_xi_needs_all_fifteen():
    with pytest.raises(UsageError):
        xi_invariants([0] * 14)
    with pytest.raises(UsageError):
        xi_invariants(full_invariants(KTParams.metric(), which=[1]))
