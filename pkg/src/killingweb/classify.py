"""Decision procedure assigning one of the eleven orthogonal webs to a CKT."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from math import isqrt
from typing import Sequence

from .exactmath import UsageError, _clean, nullspace
from .invariants import (InvariantVector, check_rotational_form, check_translational_form,
                         full_invariants, kv_invariants, rotational_invariants,
                         translational_invariants, xi_invariants)
from .killing import (XYZ, Isometry, KTParams, KVParams, _is_zero, apply_isometry,
                      apply_isometry_kv, cross_matrix, has_distinct_eigenvalues,
                      has_normal_eigenvectors, lie_derivative)

TAU_CLASS = 1e-9


class DomainError(Exception):
    """Input is well formed but outside the domain (not a CKT, degenerate, ...)."""


class NotCKTError(DomainError):
    pass


class ConsistencyError(DomainError):
    """An aligned tensor failed the normal form it was expected to satisfy."""


class WebClass(str, Enum):
    CARTESIAN = "CARTESIAN"
    CIRCULAR_CYLINDRICAL = "CIRCULAR_CYLINDRICAL"
    PARABOLIC_CYLINDRICAL = "PARABOLIC_CYLINDRICAL"
    ELLIPTIC_HYPERBOLIC = "ELLIPTIC_HYPERBOLIC"
    SPHERICAL = "SPHERICAL"
    PROLATE_SPHEROIDAL = "PROLATE_SPHEROIDAL"
    OBLATE_SPHEROIDAL = "OBLATE_SPHEROIDAL"
    PARABOLIC = "PARABOLIC"
    CONICAL = "CONICAL"
    PARABOLOIDAL = "PARABOLOIDAL"
    ELLIPSOIDAL = "ELLIPSOIDAL"

    @property
    def group(self) -> str:
        if self in _TRANSLATIONAL_WEBS:
            return "translational"
        if self in _ROTATIONAL_WEBS:
            return "rotational"
        return "asymmetric"

    def pretty(self) -> str:
        return self.value.lower().replace("_", " ").replace("elliptic hyperbolic", "elliptic-hyperbolic")


_TRANSLATIONAL_WEBS = {WebClass.CARTESIAN, WebClass.CIRCULAR_CYLINDRICAL,
                       WebClass.PARABOLIC_CYLINDRICAL, WebClass.ELLIPTIC_HYPERBOLIC}
_ROTATIONAL_WEBS = {WebClass.SPHERICAL, WebClass.PROLATE_SPHEROIDAL,
                    WebClass.OBLATE_SPHEROIDAL, WebClass.PARABOLIC}


class KvKind(str, Enum):
    TRANSLATIONAL = "TRANSLATIONAL"
    ROTATIONAL = "ROTATIONAL"
    HELICOIDAL = "HELICOIDAL"


@dataclass(frozen=True)
class KvClass:
    kind: KvKind
    handedness: int | None
    invariants: InvariantVector


def _sign(v) -> int:
    return (v > 0) - (v < 0)


def classify_kv(V: KVParams) -> KvClass:
    if V.is_zero():
        raise UsageError("the zero Killing vector has no class")
    inv = kv_invariants(V)
    d1, d2 = inv.values
    if _is_zero(d1):
        if not _is_zero(d2):  # cannot happen: d1 = 0 forces C = 0
            raise ConsistencyError("C.C = 0 with A.C != 0")
        return KvClass(KvKind.TRANSLATIONAL, None, inv)
    if _is_zero(d2):
        return KvClass(KvKind.ROTATIONAL, None, inv)
    return KvClass(KvKind.HELICOIDAL, _sign(d2), inv)


# ------------------------------------------------------------------ frames

def _rational_sqrt(q) -> Fraction | None:
    q = Fraction(q)
    if q < 0:
        return None
    n, d = q.numerator, q.denominator
    rn, rd = isqrt(n), isqrt(d)
    if rn * rn == n and rd * rd == d:
        return Fraction(rn, rd)
    return None


def frame_from_axis(v: Sequence) -> tuple:
    """Proper rotation whose third column is v/|v|.

    The first column is the standard basis vector least aligned with the axis,
    orthogonalized; the second completes a right-handed frame.  The result is
    exact when the required square roots are rational, floating otherwise.
    """
    exact = all(not isinstance(c, float) for c in v)
    n2 = sum(c * c for c in v)
    if _is_zero(n2):
        raise UsageError("axis must be nonzero")
    r = _rational_sqrt(n2) if exact else None
    if r is not None:
        n = [Fraction(c) / r for c in v]
    else:
        s = math.sqrt(float(n2))
        n = [float(c) / s for c in v]
        exact = False
    seed = min(range(3), key=lambda i: (abs(float(n[i])), i))
    e = [1 if i == seed else 0 for i in range(3)]
    u = [e[i] - n[seed] * n[i] for i in range(3)]
    u2 = sum(c * c for c in u)
    r = _rational_sqrt(u2) if exact else None
    if r is not None:
        u = [Fraction(c) / r for c in u]
    else:
        s = math.sqrt(float(u2))
        u = [float(c) / s for c in u]
        n = [float(c) for c in n]
    w = [n[1] * u[2] - n[2] * u[1], n[2] * u[0] - n[0] * u[2], n[0] * u[1] - n[1] * u[0]]
    lam = [[u[i], w[i], n[i]] for i in range(3)]
    d = _det(lam)
    if d < 0:
        lam = [[u[i], -w[i], n[i]] for i in range(3)]
    return tuple(tuple(_clean(c) if not isinstance(c, float) else c for c in row) for row in lam)


def _det(m):
    return (m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]))


def canonicalize_kv(V: KVParams) -> Isometry:
    """Isometry bringing V to a3 X3, c3 R3 or a3 X3 + c3 R3."""
    cls = classify_kv(V)
    if cls.kind == KvKind.TRANSLATIONAL:
        return Isometry(frame_from_axis(V.a), (0, 0, 0))
    a, c = V.a, V.c
    cc = sum(x * x for x in c)
    axc = [a[1] * c[2] - a[2] * c[1], a[2] * c[0] - a[0] * c[2], a[0] * c[1] - a[1] * c[0]]
    if isinstance(cc, float):
        delta = [x / cc for x in axc]
    else:
        delta = [_clean(Fraction(x) / cc) for x in axc]
    return Isometry(frame_from_axis(c), delta)


# ------------------------------------------------------------ symmetries

_KV_UNITS = [KVParams.from_vector([int(i == k) for i in range(6)]) for k in range(6)]


def symmetry_basis(K: KTParams) -> list[KVParams]:
    """Basis of Killing vectors V with L_V K = 0 (exact input required)."""
    if not K.is_exact():
        raise UsageError("symmetry_basis needs exact parameters")
    columns = []
    for V in _KV_UNITS:
        L = lie_derivative(V, K)
        col = {}
        for i in range(3):
            for j in range(i, 3):
                for mono, c in L[i][j].coefficients(XYZ).items():
                    col[(i, j, mono)] = c.constant_value()
        columns.append(col)
    keys = sorted({k for col in columns for k in col})
    rows = [[col.get(k, 0) for col in columns] for k in keys]
    basis = nullspace(rows, 6)
    return [KVParams.from_vector(v) for v in basis]


def _translational_member(basis: list[KVParams]) -> KVParams | None:
    """A nonzero element of span(basis) with vanishing rotational part, if any."""
    if not basis:
        return None
    rows = [[V.c[i] for V in basis] for i in range(3)]
    null = nullspace(rows, len(basis))
    if not null:
        return None
    coeffs = null[0]
    vec = [0] * 6
    for t, V in zip(coeffs, basis):
        for i, x in enumerate(V.to_vector()):
            vec[i] = vec[i] + t * x
    return KVParams.from_vector([_clean(Fraction(x)) for x in vec])


# ---------------------------------------------------------- classification

@dataclass
class ClassificationReport:
    web: WebClass
    aligning_isometry: Isometry
    symmetry_basis: list = field(default_factory=list)
    invariant_trace: list = field(default_factory=list)
    aligned: KTParams | None = None
    symmetry_vector: KVParams | None = None

    def to_json(self) -> dict:
        return {"web": self.web.value,
                "aligning_isometry": self.aligning_isometry.to_json(),
                "symmetry_basis": [V.to_json() for V in self.symmetry_basis],
                "invariant_trace": [inv.to_json() for inv in self.invariant_trace]}


def check_ckt(K: KTParams) -> None:
    if not K.is_exact():
        raise UsageError("CKT tests need exact parameters")
    if not has_normal_eigenvectors(K):
        raise NotCKTError("TSN conditions violated: eigenvectors are not normal")
    if not has_distinct_eigenvalues(K):
        raise NotCKTError("eigenvalues are not pointwise distinct (discriminant vanishes identically)")


def _zero(v, tol: float | None) -> bool:
    if tol is None or not isinstance(v, float):
        return _is_zero(v)
    return abs(v) <= tol


def _aligned(K: KTParams, h: Isometry) -> tuple[KTParams, float | None, float]:
    """Apply h; when h is floating, rescale so the largest parameter is 1."""
    if h.exact:
        return apply_isometry(K, h), None, 1.0
    Kf = apply_isometry(K.to_float(), h)
    scale = Kf.max_abs() or 1.0
    return Kf.scale(1.0 / scale), TAU_CLASS, scale


def _unscale(K: KTParams, scale: float) -> KTParams:
    return K if scale == 1.0 else K.scale(scale)


def classify_web(K: KTParams, *, check: bool = True) -> ClassificationReport:
    if check:
        check_ckt(K)
    ident = Isometry.identity()
    if K.is_constant():
        return ClassificationReport(WebClass.CARTESIAN, ident, [], [], K)

    basis = symmetry_basis(K)
    if not basis:
        delta = full_invariants(K)
        xi = xi_invariants(delta)
        x = xi.values
        if x[0] == 0 and x[1] == 0:
            web = WebClass.PARABOLOIDAL
        elif x[2] == 0:
            web = WebClass.ELLIPSOIDAL
        elif x[3] == 0 and x[4] == 0 and x[5] == 0:
            web = WebClass.CONICAL
        else:
            web = WebClass.ELLIPSOIDAL
        return ClassificationReport(web, ident, basis, [delta, xi], K)

    classes = [classify_kv(V) for V in basis]
    trans = _translational_member(basis)
    helicoidal = any(c.kind == KvKind.HELICOIDAL for c in classes)

    if trans is not None:
        h = canonicalize_kv(trans)
        Kt, tol, scale = _aligned(K, h)
        try:
            check_translational_form(Kt, tol)
        except UsageError as exc:
            raise ConsistencyError(f"aligned tensor is not translational: {exc}") from exc
        inv = translational_invariants(Kt, tol)
        d1, d2 = inv.values
        # d2 is a sum of squares of quadratic quantities; test those at the same scale as d1
        z1 = _zero(d1, tol)
        z2 = _zero(math.sqrt(abs(d2)) if tol is not None else d2, tol)
        if helicoidal:
            web = WebClass.CIRCULAR_CYLINDRICAL
        elif z1 and z2:
            web = WebClass.CARTESIAN
        elif not z1 and z2:
            web = WebClass.CIRCULAR_CYLINDRICAL
        elif z1:
            web = WebClass.PARABOLIC_CYLINDRICAL
        else:
            web = WebClass.ELLIPTIC_HYPERBOLIC
        if helicoidal and not (not z1 and z2):
            raise ConsistencyError("helicoidal symmetry but translational invariants disagree")
        return ClassificationReport(web, h, basis, [inv], _unscale(Kt, scale), trans)

    rot = next((V for V, c in zip(basis, classes) if c.kind == KvKind.ROTATIONAL), None)
    if rot is None:
        raise ConsistencyError("symmetric tensor with neither translational nor rotational symmetry")
    h = canonicalize_kv(rot)
    Kr, tol, scale = _aligned(K, h)
    try:
        check_rotational_form(Kr, tol)
    except UsageError as exc:
        raise ConsistencyError(f"aligned tensor is not rotational: {exc}") from exc
    inv = rotational_invariants(Kr, tol)
    d1, d2 = inv.values[0], inv.values[1]
    z1, z2 = _zero(d1, tol), _zero(d2, tol)
    if z1 and z2:
        web = WebClass.CIRCULAR_CYLINDRICAL
    elif not z1 and z2:
        web = WebClass.SPHERICAL
    elif not z1:
        web = WebClass.PROLATE_SPHEROIDAL if d2 > 0 else WebClass.OBLATE_SPHEROIDAL
    else:
        web = WebClass.PARABOLIC
    return ClassificationReport(web, h, basis, [inv], _unscale(Kr, scale), rot)


def kv_canonical_image(V: KVParams) -> KVParams:
    return apply_isometry_kv(V, canonicalize_kv(V))


__all__ = ["WebClass", "KvKind", "KvClass", "ClassificationReport", "DomainError",
           "NotCKTError", "ConsistencyError", "classify_kv", "canonicalize_kv",
           "symmetry_basis", "classify_web", "frame_from_axis", "check_ckt", "TAU_CLASS",
           "cross_matrix"]
