"""Shared fixtures: random canonical tensors per web, analytic essential
parameters, and the standard potentials used across the test modules."""

from __future__ import annotations

import itertools
import math
from fractions import Fraction as F

import sympy as sp

from killingweb.canonical import canonical_web_tensor
from killingweb.classify import WebClass as W
from killingweb.killing import KTParams

CM_POTENTIAL = "1/(x-y)^2 + 1/(y-z)^2 + 1/(z-x)^2"
WEIGHTED_CM = "g1/(m1*x-m2*y)^2 + g2/(m2*y-m3*z)^2 + g3/(m3*z-m1*x)^2"


def rat(rng, lo=-6, hi=6, den=4, nonzero=False):
    while True:
        q = F(rng.randint(lo * den, hi * den), rng.randint(1, den))
        if q or not nonzero:
            return q


def pos(rng, hi=6, den=4):
    return F(rng.randint(1, hi * den), rng.randint(1, den))


def random_canonical(web: W, rng) -> tuple[KTParams, dict]:
    """A random canonical CKT of ``web`` and its free parameters."""
    if web == W.CARTESIAN:
        p = dict(a1=rat(rng), a2=rat(rng), a3=rat(rng))
    elif web == W.CIRCULAR_CYLINDRICAL:
        p = dict(a1=rat(rng), a3=rat(rng), c3=rat(rng, nonzero=True))
    elif web == W.PARABOLIC_CYLINDRICAL:
        p = dict(a1=rat(rng), a3=rat(rng), b23=rat(rng, nonzero=True))
    elif web == W.ELLIPTIC_HYPERBOLIC:
        c3 = rat(rng, nonzero=True)
        a2 = rat(rng)
        p = dict(a1=a2 + pos(rng) * (1 if c3 > 0 else -1), a2=a2, a3=rat(rng), c3=c3)
    elif web == W.SPHERICAL:
        p = dict(a1=rat(rng), c2=rat(rng, nonzero=True), c3=rat(rng))
    elif web in (W.PROLATE_SPHEROIDAL, W.OBLATE_SPHEROIDAL):
        c2 = rat(rng, nonzero=True)
        a1 = rat(rng)
        s = 1 if (c2 > 0) == (web == W.PROLATE_SPHEROIDAL) else -1
        p = dict(a1=a1, a3=a1 + s * pos(rng), c2=c2, c3=rat(rng))
    elif web == W.PARABOLIC:
        p = dict(a1=rat(rng), b12=rat(rng, nonzero=True), c3=rat(rng))
    elif web == W.CONICAL:
        c = set()
        while len(c) < 3:
            c.add(rat(rng))
        c = list(c)
        rng.shuffle(c)
        p = dict(a1=rat(rng), c1=c[0], c2=c[1], c3=c[2])
    elif web == W.PARABOLOIDAL:
        while True:
            b12, b21, c3 = rat(rng, nonzero=True), rat(rng, nonzero=True), rat(rng, nonzero=True)
            if b12 + b21:
                break
        a1, a2 = rat(rng), rat(rng)
        a3 = (b12 * (b12 * b21 + c3 * a2) + b21 * (b12 * b21 + c3 * a1)) / (c3 * (b12 + b21))
        p = dict(a1=a1, a2=a2, a3=a3, b12=b12, b21=b21, c3=c3)
    elif web == W.ELLIPSOIDAL:
        while True:
            c1, c2, c3 = rat(rng, nonzero=True), rat(rng, nonzero=True), rat(rng, nonzero=True)
            a1, a2 = rat(rng), rat(rng)
            if len({c1, c2, c3}) == 3 and a1 != a2:
                break
        a3 = (a1 * c3 * c1 - a2 * c2 * c3 - (a1 - a2) * c1 * c2) / (c3 * (c1 - c2))
        p = dict(a1=a1, a2=a2, a3=a3, c1=c1, c2=c2, c3=c3)
    else:
        raise ValueError(web)
    return canonical_web_tensor(web, p), p


def expected_essential(web: W, K: KTParams) -> dict:
    """Essential parameters of a canonical tensor straight from its entries.

    Gauges: conical c = 1; paraboloidal and ellipsoidal shifted so c = b - c.
    """
    n = {k: F(v) for k, v in K.named().items()}
    if web == W.ELLIPTIC_HYPERBOLIC:
        return {"a": math.sqrt((n["a1"] - n["a2"]) / n["c3"])}
    if web == W.PROLATE_SPHEROIDAL:
        return {"a": math.sqrt((n["a3"] - n["a1"]) / n["c2"])}
    if web == W.OBLATE_SPHEROIDAL:
        return {"a": math.sqrt((n["a1"] - n["a3"]) / n["c2"])}
    if web == W.CONICAL:
        c1, c2, c3 = sorted((n["c1"], n["c2"], n["c3"]))
        return {"b": math.sqrt((c2 - c1) / (c3 - c1)), "c": 1.0}
    if web == W.PARABOLOIDAL:
        gap = abs(n["b12"] + n["b21"]) / abs(2 * n["c3"])
        return {"b": float(2 * gap), "c": float(gap)}
    if web == W.ELLIPSOIDAL:
        a = [n["a1"], n["a2"], n["a3"]]
        c = [n["c1"], n["c2"], n["c3"]]
        for p in itertools.permutations(range(3)):
            A = [a[i] for i in p]
            C = [c[i] for i in p]
            amb = (A[0] - A[1]) / C[2]
            cma = (A[2] - A[0]) / C[1]
            # shift so that c = b - c, with b = a - amb and c = a + cma
            bmc = -amb - cma
            if amb > 0 and bmc > 0:
                cc = bmc
                return {"a": float(cc + bmc + amb), "b": float(2 * bmc), "c": float(cc)}
        raise AssertionError("no ordering with a > b > c")
    return {}


def translational_preform(rng, a1=None, a2=None, a3=None, alpha1=None, alpha2=None, alpha3=None,
                          b13=None, b23=None, c3=None, beta1=None) -> KTParams:
    """General tensor invariant under translations along z; beta1 is the
    coefficient of the (-y, x) terms in the third row."""
    vals = dict(a1=a1, a2=a2, a3=a3, alpha1=alpha1, alpha2=alpha2, alpha3=alpha3,
                b13=b13, b23=b23, c3=c3, beta1=beta1)
    vals = {k: (rat(rng) if v is None else F(v)) for k, v in vals.items()}
    vals["b33"] = -vals.pop("beta1")
    return KTParams.from_named(vals)


# K1..K4 of the equal-mass system, component matrices in closed form
CM_DISPLAY = [
    [["0", "1", "1"], ["1", "0", "1"], ["1", "1", "0"]],
    [["2*y + 2*z", "-x - y", "-z - x"], ["-x - y", "2*z + 2*x", "-y - z"],
     ["-z - x", "-y - z", "2*x + 2*y"]],
    [["y**2 + z**2", "-x*y", "-z*x"], ["-x*y", "z**2 + x**2", "-y*z"],
     ["-z*x", "-y*z", "x**2 + y**2"]],
    [["-2*y*z", "(x+y-z)*z", "(z+x-y)*y"], ["(x+y-z)*z", "-2*z*x", "(z+y-x)*x"],
     ["(z+x-y)*y", "(z+y-x)*x", "-2*x*y"]],
]


def printed_weighted_lambda(m1, m2, m3):
    M = (m1 ** 2 * m2 ** 2 + m2 ** 2 * m3 ** 2 + m3 ** 2 * m1 ** 2) ** -0.5
    N = (m2 ** 2 + m3 ** 2) ** -0.5
    return [[m1 * M / N, 0.0, m2 * m3 * M],
            [-m2 * m3 ** 2 * M * N, m2 * N, m3 * m1 * M],
            [-m3 * m2 ** 2 * M * N, -m3 * N, m1 * m2 * M]]


# ------------------------------------------------ brute-force sympy oracles

_XYZ = sp.symbols("x y z")


def _killing_vectors():
    x = sp.Matrix(_XYZ)
    e = [sp.Matrix([int(i == k) for i in range(3)]) for k in range(3)]
    return e + [ek.cross(x) for ek in e]


def to_sympy(text: str):
    return sp.sympify(text.replace("^", "**"), locals=dict(zip("xyz", _XYZ)))


def _curl_numerator(M, V):
    """Monomial coefficients of the numerator of curl(M grad V)."""
    x = _XYZ
    W = M * sp.Matrix([sp.diff(V, v) for v in x])
    curl = [sp.diff(W[k], x[j]) - sp.diff(W[j], x[k]) for j, k in ((0, 1), (1, 2), (2, 0))]
    out = []
    for c in curl:
        num = sp.numer(sp.together(c))
        out.extend(sp.Poly(sp.expand(num), *x).coeffs() if num != 0 else [])
    return out


def compatible_dimension_oracle(V) -> int:
    """dim{K Killing tensor : d(K dV) = 0}, from symmetrized products of Killing vectors."""
    kv = _killing_vectors()
    pairs = [(i, j) for i in range(6) for j in range(i, 6)]
    s = sp.symbols(f"s0:{len(pairs)}")
    M = sp.zeros(3, 3)
    for t, (i, j) in zip(s, pairs):
        M += t * (kv[i] * kv[j].T + kv[j] * kv[i].T) / 2
    comps = []
    for i in range(3):
        for j in range(i, 3):
            comps.extend(sp.Poly(sp.expand(M[i, j]), *_XYZ).coeffs())
    A = sp.Matrix([[sp.diff(e, t) for t in s] for e in comps])
    eqs = _curl_numerator(M, V)
    E = sp.Matrix([[sp.diff(e, t) for t in s] for e in eqs]) if eqs else sp.zeros(1, len(s))
    return (len(s) - E.rank()) - (len(s) - A.rank())


def kt_sympy(K) -> sp.Matrix:
    from killingweb.killing import kt_components
    return sp.Matrix(3, 3, lambda i, j: to_sympy(str(kt_components(K)[i][j])))


def is_compatible_oracle(K, V) -> bool:
    return all(e == 0 for e in _curl_numerator(kt_sympy(K), V))


def component_rank(mats) -> int:
    """Rank of a family of polynomial matrix fields, via their monomial coefficients."""
    rows = []
    for M in mats:
        row = {}
        for i in range(3):
            for j in range(i, 3):
                e = sp.expand(M[i, j])
                if e != 0:
                    for mono, c in sp.Poly(e, *_XYZ).terms():
                        row[(i, j, mono)] = c
        rows.append(row)
    keys = sorted({k for r in rows for k in r})
    return sp.Matrix([[r.get(k, 0) for k in keys] for r in rows]).rank()
