"""Canonical forms: the frame and essential parameters of a classified CKT."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Sequence

import numpy as np

from .charts import (COORDINATES, ESSENTIAL, SQUARED, catalog_jacobian, catalog_point,
                     max_offdiagonal, sample_coordinates, symmetric_eig3)
from .classify import (ClassificationReport, ConsistencyError, DomainError, WebClass,
                       classify_web)
from .exactmath import UsageError, _clean, as_rational
from .killing import Isometry, KTParams, _is_zero, apply_isometry

TAU_CANON = 1e-8

W = WebClass

# nonzero parameters of each canonical tensor, plus the equalities among them
_SHAPE = {
    W.CARTESIAN: ({"a1", "a2", "a3"}, []),
    W.CIRCULAR_CYLINDRICAL: ({"a1", "a2", "a3", "c3"}, [("a1", "a2")]),
    W.PARABOLIC_CYLINDRICAL: ({"a1", "a2", "a3", "b23"}, [("a1", "a2")]),
    W.ELLIPTIC_HYPERBOLIC: ({"a1", "a2", "a3", "c3"}, []),
    W.SPHERICAL: ({"a1", "a2", "a3", "c1", "c2", "c3"}, [("a1", "a2"), ("a1", "a3"), ("c1", "c2")]),
    W.PROLATE_SPHEROIDAL: ({"a1", "a2", "a3", "c1", "c2", "c3"}, [("a1", "a2"), ("c1", "c2")]),
    W.OBLATE_SPHEROIDAL: ({"a1", "a2", "a3", "c1", "c2", "c3"}, [("a1", "a2"), ("c1", "c2")]),
    W.PARABOLIC: ({"a1", "a2", "a3", "b12", "b21", "c3"}, [("a1", "a2"), ("a1", "a3"), ("b12", "-b21")]),
    W.CONICAL: ({"a1", "a2", "a3", "c1", "c2", "c3"}, [("a1", "a2"), ("a1", "a3")]),
    W.PARABOLOIDAL: ({"a1", "a2", "a3", "b12", "b21", "c3"}, []),
    W.ELLIPSOIDAL: ({"a1", "a2", "a3", "c1", "c2", "c3"}, []),
}

# free inputs of canonical_web_tensor; tied parameters are filled in
_INPUTS = {
    W.CARTESIAN: ("a1", "a2", "a3"),
    W.CIRCULAR_CYLINDRICAL: ("a1", "a3", "c3"),
    W.PARABOLIC_CYLINDRICAL: ("a1", "a3", "b23"),
    W.ELLIPTIC_HYPERBOLIC: ("a1", "a2", "a3", "c3"),
    W.SPHERICAL: ("a1", "c2", "c3"),
    W.PROLATE_SPHEROIDAL: ("a1", "a3", "c2", "c3"),
    W.OBLATE_SPHEROIDAL: ("a1", "a3", "c2", "c3"),
    W.PARABOLIC: ("a1", "b12", "c3"),
    W.CONICAL: ("a1", "c1", "c2", "c3"),
    W.PARABOLOIDAL: ("a1", "a2", "a3", "b12", "b21", "c3"),
    W.ELLIPSOIDAL: ("a1", "a2", "a3", "c1", "c2", "c3"),
}


def canonical_web_tensor(web: WebClass, params: Mapping[str, object]) -> KTParams:
    """Canonical CKT of ``web`` from its free parameters (exact rationals).

    Raises DomainError when the web's defining constraint fails.
    """
    web = W(web)
    allowed = _INPUTS[web]
    extra = set(params) - set(allowed)
    if extra:
        raise UsageError(f"{web.value} takes parameters {allowed}, got extra {sorted(extra)}")
    p = {k: as_rational(params.get(k, 0)) for k in allowed}
    n = dict(p)
    if web in (W.CIRCULAR_CYLINDRICAL, W.PARABOLIC_CYLINDRICAL):
        n["a2"] = p["a1"]
    elif web == W.SPHERICAL:
        n.update(a2=p["a1"], a3=p["a1"], c1=p["c2"])
    elif web in (W.PROLATE_SPHEROIDAL, W.OBLATE_SPHEROIDAL):
        n.update(a2=p["a1"], c1=p["c2"])
    elif web == W.PARABOLIC:
        n.update(a2=p["a1"], a3=p["a1"], b21=-p["b12"])
    elif web == W.CONICAL:
        n.update(a2=p["a1"], a3=p["a1"])

    def need(cond, msg):
        if not cond:
            raise DomainError(f"{web.value}: {msg}")

    if web == W.CIRCULAR_CYLINDRICAL:
        need(n["c3"] != 0, "c3 must be nonzero")
    elif web == W.PARABOLIC_CYLINDRICAL:
        need(n["b23"] != 0, "b23 must be nonzero")
    elif web == W.ELLIPTIC_HYPERBOLIC:
        need(n["c3"] != 0 and (n["a1"] - n["a2"]) / n["c3"] > 0, "need (a1 - a2)/c3 > 0")
    elif web == W.SPHERICAL:
        need(n["c2"] != 0, "c2 must be nonzero")
    elif web == W.PROLATE_SPHEROIDAL:
        need(n["c2"] != 0 and (n["a3"] - n["a1"]) / n["c2"] > 0, "need (a3 - a1)/c2 > 0")
    elif web == W.OBLATE_SPHEROIDAL:
        need(n["c2"] != 0 and (n["a3"] - n["a1"]) / n["c2"] < 0, "need (a3 - a1)/c2 < 0")
    elif web == W.PARABOLIC:
        need(n["b12"] != 0, "b12 must be nonzero")
    elif web == W.CONICAL:
        need(len({n["c1"], n["c2"], n["c3"]}) == 3, "c1, c2, c3 must be distinct")
    elif web == W.PARABOLOIDAL:
        b12, b21, c3 = n["b12"], n["b21"], n["c3"]
        need(c3 != 0 and (b12 != 0 or b21 != 0), "need c3 != 0 and (b12, b21) != 0")
        lhs = (b12 * (b12 * b21 + c3 * (n["a2"] - n["a3"]))
               + b21 * (b12 * b21 + c3 * (n["a1"] - n["a3"])))
        need(lhs == 0, "paraboloidal constraint violated")
    elif web == W.ELLIPSOIDAL:
        a1, a2, a3, c1, c2, c3 = (n[k] for k in ("a1", "a2", "a3", "c1", "c2", "c3"))
        need(len({c1, c2, c3}) == 3, "c1, c2, c3 must be distinct")
        need((a1 - a2) * c1 * c2 + (a2 - a3) * c2 * c3 + (a3 - a1) * c3 * c1 == 0,
             "ellipsoidal constraint violated")
    return KTParams.from_named({k: _clean(v) for k, v in n.items()})


def canonical_residual(K: KTParams, web: WebClass) -> float:
    """Relative distance of K from the display form of ``web``'s canonical tensor."""
    allowed, ties = _SHAPE[W(web)]
    n = K.normalized().named()
    scale = max((abs(float(v)) for v in n.values()), default=0.0) or 1.0
    worst = 0.0
    for k, v in n.items():
        if k not in allowed:
            worst = max(worst, abs(float(v)))
    for p, q in ties:
        if q.startswith("-"):
            worst = max(worst, abs(float(n[p]) + float(n[q[1:]])))
        else:
            worst = max(worst, abs(float(n[p]) - float(n[q])))
    return worst / scale


@dataclass
class SeparableChart:
    web: WebClass
    essential: dict
    frame: Isometry
    canonical: KTParams
    residual: float

    @classmethod
    def standard(cls, web: WebClass, essential: Mapping[str, float] | None = None) -> "SeparableChart":
        """The web's catalog chart in its own frame (identity isometry)."""
        return cls(W(web), dict(essential or {}), Isometry.identity(), KTParams.zero(), 0.0)

    @property
    def coordinates(self) -> tuple:
        return COORDINATES[self.web]

    def describe(self) -> dict:
        frame = self.frame.to_json()
        return {"web": self.web.value,
                "lambda": frame["lambda"],
                "delta": frame["delta"],
                "essential": {k: float(v) for k, v in self.essential.items()},
                "coordinates": list(self.coordinates),
                "squared_chart": self.web in SQUARED,
                "residual": self.residual}

    def to_json(self) -> dict:
        d = self.describe()
        d["canonical"] = self.canonical.to_json()
        return d


def chart_map(chart: SeparableChart, u: Sequence[float],
              signs: Sequence[int] = (1, 1, 1)) -> np.ndarray:
    """Cartesian point x = lambda T(u) + delta."""
    p = catalog_point(chart.web, u, chart.essential, signs)
    lam = np.array(chart.frame.lam, dtype=float)
    return lam @ p + np.array(chart.frame.delta, dtype=float)


def chart_pushforward_check(K: KTParams, chart: SeparableChart, u: Sequence[float],
                            signs: Sequence[int] = (1, 1, 1), relative: bool = False) -> float:
    """Largest off-diagonal entry of K expressed in the chart's coordinates at u.

    K is first carried into the chart's frame, which is the same tensor but
    avoids differencing points that sit far from the origin.
    """
    Kf = apply_isometry(K if K.is_exact() and chart.frame.exact else K.to_float(), chart.frame)
    return max_offdiagonal(Kf, lambda v: catalog_point(chart.web, v, chart.essential, signs), u,
                           relative, lambda v: catalog_jacobian(chart.web, v, chart.essential, signs))


def sample_chart_point(chart: SeparableChart, rng) -> list[float]:
    return sample_coordinates(chart.web, chart.essential, rng)


# -------------------------------------------------------------- helpers

def _rot_z(phi: float) -> Isometry:
    c, s = math.cos(phi), math.sin(phi)
    return Isometry(((c, -s, 0.0), (s, c, 0.0), (0.0, 0.0, 1.0)), (0.0, 0.0, 0.0))


def _div(p, q):
    if isinstance(p, float) or isinstance(q, float):
        return float(p) / float(q)
    return _clean(Fraction(p) / q)


def _frame(lam: np.ndarray, delta) -> Isometry:
    lam = np.array(lam, dtype=float)
    if np.linalg.det(lam) < 0:
        lam[:, 2] = -lam[:, 2]
    return Isometry(tuple(tuple(float(v) for v in row) for row in lam),
                    tuple(float(v) for v in delta))


def _apply(K: KTParams, h: Isometry) -> KTParams:
    return apply_isometry(K if h.exact else K.to_float(), h)


def _np(M) -> np.ndarray:
    return np.array(M, dtype=float)


def _translation_from_B(K: KTParams) -> np.ndarray:
    """delta minimizing |B - s I + [delta]x C| (translates B away where C allows)."""
    B, C = _np(K.B), _np(K.C)
    rows, rhs = [], []
    for i in range(3):
        for j in range(3):
            # ([d]x C)_ij = sum_k eps_{i m k} d_m C_kj
            coef = np.zeros(4)
            for m in range(3):
                for k in range(3):
                    e = _levi(i, m, k)
                    if e:
                        coef[m] += e * C[k, j]
            coef[3] = -1.0 if i == j else 0.0
            rows.append(coef)
            rhs.append(-B[i, j])
    sol, *_ = np.linalg.lstsq(np.array(rows), np.array(rhs), rcond=None)
    return sol[:3]


def _levi(i, j, k):
    return (i - j) * (j - k) * (k - i) // 2


# ------------------------------------------------ symmetric webs (aligned)

def _local_translational(K: KTParams, web: WebClass) -> Isometry:
    n = K.named()
    a1, a2, al3 = n["a1"], n["a2"], n["alpha3"]
    b13, b23, c3 = n["b13"], n["b23"], n["c3"]
    if web == W.CARTESIAN:
        A = _np(K.A)
        if np.allclose(A, np.diag(np.diag(A)), atol=0.0):
            return Isometry.identity()
        _, V = symmetric_eig3(A)
        return _frame(V, (0, 0, 0))
    if web == W.CIRCULAR_CYLINDRICAL:
        return Isometry.translation((_div(b23, c3), _div(-b13, c3), 0))
    if web == W.PARABOLIC_CYLINDRICAL:
        phi = math.pi / 2 if _is_zero(b23) else math.atan(-float(b13) / float(b23))
        s = 2 * (b13 * b13 + b23 * b23)
        d1 = _div(b23 * (a2 - a1) + 2 * al3 * b13, s)
        d2 = _div(b13 * (a2 - a1) - 2 * al3 * b23, s)
        return Isometry.translation((d1, d2, 0)).compose(_rot_z(phi))
    if web == W.ELLIPTIC_HYPERBOLIC:
        s1 = b13 * b13 - b23 * b23 + c3 * (a2 - a1)
        s2 = al3 * c3 - b13 * b23
        if _is_zero(s2):
            phi = 0.0 if s1 < 0 else math.pi / 2
        else:
            disc = float(s1) ** 2 + 4 * float(s2) ** 2
            phi = math.atan((float(s1) + math.sqrt(disc)) / (2 * float(s2)))
        h = Isometry.translation((_div(b23, c3), _div(-b13, c3), 0)).compose(_rot_z(phi))
        # the two eigen-directions are pi/2 apart; keep the one giving a^2 > 0
        Kc = _apply(K, h)
        m = Kc.named()
        if (float(m["a1"]) - float(m["a2"])) / float(m["c3"]) < 0:
            h = h.compose(_rot_z(math.pi / 2))
        return h
    raise ConsistencyError(f"{web.value} is not a translational web")


def _local_rotational(K: KTParams, web: WebClass) -> Isometry:
    n = K.named()
    if web == W.CIRCULAR_CYLINDRICAL:
        return _local_translational(K, web)
    if web in (W.SPHERICAL, W.PROLATE_SPHEROIDAL, W.OBLATE_SPHEROIDAL):
        return Isometry.translation((0, 0, _div(n["b12"], n["c2"])))
    if web == W.PARABOLIC:
        return Isometry.translation((0, 0, _div(n["a1"] - n["a3"], 2 * n["b12"])))
    raise ConsistencyError(f"{web.value} is not a rotational web")


def _positive_root(a2: float, web: WebClass) -> dict:
    if not a2 > 0:
        raise DomainError(f"{web.value}: near-degenerate input, a^2 = {a2:.3e} is not positive")
    return {"a": math.sqrt(a2)}


def _essential_symmetric(K: KTParams, web: WebClass) -> dict:
    n = K.named()
    if web == W.ELLIPTIC_HYPERBOLIC:
        return _positive_root(float(n["a1"] - n["a2"]) / float(n["c3"]), web)
    if web == W.PROLATE_SPHEROIDAL:
        return _positive_root(float(n["a3"] - n["a1"]) / float(n["c2"]), web)
    if web == W.OBLATE_SPHEROIDAL:
        return _positive_root(-float(n["a3"] - n["a1"]) / float(n["c2"]), web)
    return {}


# --------------------------------------------------------- asymmetric webs

_PERMS = [np.eye(3)[:, list(p)] for p in itertools.permutations(range(3))]


def _conical(K: KTParams) -> tuple[Isometry, dict]:
    d = _translation_from_B(K)
    _, V = symmetric_eig3(_np(K.C))
    h = _frame(V, d)
    Kc = _apply(K, h)
    c1, c2, c3 = (float(Kc.C[i][i]) for i in range(3))
    if not (c1 < c2 < c3):
        raise ConsistencyError("conical tensor without distinct ordered c")
    b = math.sqrt((c2 - c1) / (c3 - c1))
    return h, {"b": b, "c": 1.0}


def _ellipsoidal_abc(a, c) -> tuple[float, float, float] | None:
    """(a, b, c) in the gauge c = b - c from diagonal entries, or None."""
    a1, a2, a3 = a
    c1, c2, c3 = c
    tiny = 1e-12 * max(1.0, max(abs(v) for v in c))
    z2, z3 = abs(c2) <= tiny, abs(c3) <= tiny
    if z2 and z3:
        return None
    if not z2 and not z3:
        amb, cma = (a1 - a2) / c3, (a3 - a1) / c2
        A, B, C = 0.0, -amb, cma
    elif z2:
        amb, cmb = (a1 - a2) / c3, (a1 - a2) / c1
        A, B, C = amb, 0.0, cmb
    else:
        cma, cmb = (a3 - a1) / c2, (a3 - a1) / c1
        A, B, C = 0.0, cma - cmb, cma
    if not (A > B > C):
        return None
    gap = B - C
    shift = gap - C
    return A + shift, B + shift, C + shift


def _ellipsoidal(K: KTParams) -> tuple[Isometry, dict]:
    d = _translation_from_B(K)
    Kt = _apply(K, Isometry.translation(d))
    cw, V = symmetric_eig3(_np(Kt.C))
    span = max(abs(cw).max(), 1e-300)
    gaps = (cw[1] - cw[0]) / span, (cw[2] - cw[1]) / span
    if min(gaps) < 1e-7:
        if max(gaps) >= 1e-7:
            raise ConsistencyError("ellipsoidal tensor with exactly two equal c eigenvalues")
        _, V = symmetric_eig3(_np(Kt.A))
    best = None
    for P in _PERMS:
        lam = V @ P
        h = _frame(lam, d)
        Kc = _apply(K, h)
        a = [float(Kc.A[i][i]) for i in range(3)]
        c = [float(Kc.C[i][i]) for i in range(3)]
        abc = _ellipsoidal_abc(a, c)
        if abc is not None:
            best = (h, abc)
            break
    if best is None:
        raise ConsistencyError("no axis order gives a > b > c")
    h, (A, B, C) = best
    return h, {"a": A, "b": B, "c": C}


def _paraboloidal_bc(n: dict) -> tuple[float, float] | None:
    a1, a2, a3 = (float(n[k]) for k in ("a1", "a2", "a3"))
    b12, b21, c3 = float(n["b12"]), float(n["b21"]), float(n["c3"])
    scale = max(abs(b12), abs(b21), abs(c3), 1e-300)
    if abs(b12) > 1e-9 * scale:
        b = (a1 - a3) / (2 * b12)
        c = b + (b12 + b21) / (2 * c3)
    elif abs(b21) > 1e-9 * scale:
        c = (a1 - a2) / (2 * b21)
        b = c - b21 / (2 * c3)
    else:
        return None
    return (b, c) if b > c else None


def _paraboloidal(K: KTParams) -> tuple[Isometry, dict]:
    Cm = _np(K.C)
    cw, V = symmetric_eig3(Cm)
    k = int(np.argmax(np.abs(cw)))
    c3 = cw[k]
    if abs(c3) <= 1e-12 * max(1.0, K.to_float().max_abs()):
        raise DomainError("paraboloidal tensor with C = 0 has a translational symmetry")
    n0 = V[:, k]
    B = _np(K.B)
    cands = []
    for sgn in (1.0, -1.0):
        n = sgn * n0
        w = B @ n - (n @ B @ n) * n
        delta = -np.cross(n, w) / c3
        # in-plane basis, then the rotation equalizing the two diagonal b entries
        e = np.eye(3)[int(np.argmin(np.abs(n)))]
        u = e - (e @ n) * n
        u /= np.linalg.norm(u)
        v = np.cross(n, u)
        m11, m22 = u @ B @ u, v @ B @ v
        m12, m21 = u @ B @ v, v @ B @ u
        psi0 = 0.5 * math.atan2(-(m11 - m22), m12 + m21)
        for q in range(4):
            psi = psi0 + q * math.pi / 2
            uu = math.cos(psi) * u + math.sin(psi) * v
            vv = -math.sin(psi) * u + math.cos(psi) * v
            lam = np.column_stack([uu, vv, n])
            h = _frame(lam, delta)
            Kc = _apply(K, h)
            if canonical_residual(Kc, W.PARABOLOIDAL) > TAU_CANON:
                continue
            bc = _paraboloidal_bc(Kc.named())
            if bc is None:
                continue
            b, c = bc
            t = 2 * c - b  # shift along the axis to the gauge c = b - c
            h = _frame(lam, delta + t * n)
            cands.append((float(np.linalg.norm(delta + t * n)), len(cands), h, (b - t, c - t)))
    if not cands:
        raise ConsistencyError("no paraboloidal frame satisfies b > c")
    _, _, h, (b, c) = min(cands, key=lambda t: (round(t[0], 9), t[1]))
    return h, {"b": b, "c": c}


# ------------------------------------------------------------------ driver

def to_canonical(K: KTParams, web: WebClass | None = None,
                 report: ClassificationReport | None = None) -> SeparableChart:
    """Frame and essential parameters bringing K to its canonical web form.

    ``report`` (from classify_web) is reused when given; otherwise K is
    classified first.  ``web`` may be passed to assert the expected class.
    """
    if report is None:
        report = classify_web(K)
    if web is not None and W(web) != report.web:
        raise ConsistencyError(f"K classifies as {report.web.value}, not {W(web).value}")
    web = report.web
    Ka = report.aligned if report.aligned is not None else K
    h0 = report.aligning_isometry
    if web.group == "asymmetric":
        h1, essential = {W.CONICAL: _conical, W.PARABOLOIDAL: _paraboloidal,
                         W.ELLIPSOIDAL: _ellipsoidal}[web](K)
        frame = h1
    else:
        if report.symmetry_vector is not None and report.symmetry_vector.c == (0, 0, 0):
            h1 = _local_translational(Ka, web)
        elif web == W.CARTESIAN:
            h1 = _local_translational(Ka, web)
        else:
            h1 = _local_rotational(Ka, web)
        frame = h0.compose(h1)
        essential = None
    Kc = _apply(K, frame)
    if essential is None:
        essential = _essential_symmetric(Kc, web)
    res = canonical_residual(Kc, web)
    if res > TAU_CANON:
        raise ConsistencyError(f"canonical form residual {res:.3e} exceeds {TAU_CANON:g}")
    return SeparableChart(web, essential, frame, Kc, res)


__all__ = ["canonical_web_tensor", "canonical_residual", "to_canonical", "SeparableChart",
           "chart_map", "chart_pushforward_check", "sample_chart_point", "symmetric_eig3",
           "TAU_CANON", "ESSENTIAL"]
