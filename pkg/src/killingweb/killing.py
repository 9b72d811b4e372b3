"""Parameter algebra of valence-two Killing tensors and Killing vectors on E^3.

A Killing tensor is stored as three 3x3 blocks::

    A = [[a1, alpha3, alpha2], [alpha3, a2, alpha1], [alpha2, alpha1, a3]]
    B = [[b11, b12, b13], [b21, b22, b23], [b31, b32, b33]]
    C = [[c1, gamma3, gamma2], [gamma3, c2, gamma1], [gamma2, gamma1, c3]]

and its contravariant components at x are ``A + B X^T + X B^T + X C X^T`` with
``X`` the cross-product matrix of x (``X v = x cross v``).  A Killing vector is
``a + x cross c``.

Isometries act by the substitution ``x = lam @ xt + delta``: the transformed
parameters describe the same geometric tensor in the new Cartesian frame.
Applying h1 and then h2 equals applying ``h1.compose(h2)``.

Scalars may be ``int``/``Fraction`` (exact), ``float``, or ``Poly`` over a
parameter variable list (symbolic), except where noted.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import comb
from typing import Iterable, Mapping, Sequence

from .exactmath import (Poly, UsageError, _clean, _is_scalar, as_rational, det3,
                        format_rational, inv3, rank)

XYZ = ("x", "y", "z")

PARAMS = ("a1", "a2", "a3", "alpha1", "alpha2", "alpha3",
          "b11", "b22", "b33", "b23", "b31", "b12", "b32", "b13", "b21",
          "c1", "c2", "c3", "gamma1", "gamma2", "gamma3")

KV_PARAMS = ("a1", "a2", "a3", "c1", "c2", "c3")

# (row, col) of each parameter inside its block
_A_POS = {"a1": (0, 0), "a2": (1, 1), "a3": (2, 2),
          "alpha1": (1, 2), "alpha2": (0, 2), "alpha3": (0, 1)}
_B_POS = {f"b{i}{j}": (i - 1, j - 1) for i in range(1, 4) for j in range(1, 4)}
_C_POS = {"c1": (0, 0), "c2": (1, 1), "c3": (2, 2),
          "gamma1": (1, 2), "gamma2": (0, 2), "gamma3": (0, 1)}


class NotOrthogonalError(UsageError):
    pass


# ------------------------------------------------------------ generic helpers

def _sum(items):
    total = 0
    for it in items:
        total = total + it
    return total


def _mm(a, b):
    return [[_sum(a[i][k] * b[k][j] for k in range(3)) for j in range(3)] for i in range(3)]


def _tr(a):
    return [[a[j][i] for j in range(3)] for i in range(3)]


def _madd(*ms):
    return [[_sum(m[i][j] for m in ms) for j in range(3)] for i in range(3)]


def _mv(a, v):
    return [_sum(a[i][k] * v[k] for k in range(3)) for i in range(3)]


def cross_matrix(v):
    """Matrix X with X @ w = v cross w."""
    return [[0, -v[2], v[1]], [v[2], 0, -v[0]], [-v[1], v[0], 0]]


def _norm_scalar(v):
    if isinstance(v, (Poly, float)):
        return v
    return as_rational(v)


def _is_zero(v) -> bool:
    if isinstance(v, Poly):
        return v.is_zero()
    return v == 0


# ------------------------------------------------------------------ KTParams

@dataclass(frozen=True, eq=False)
class KTParams:
    A: tuple
    B: tuple
    C: tuple

    def __post_init__(self):
        for name in ("A", "B", "C"):
            m = getattr(self, name)
            if len(m) != 3 or any(len(r) != 3 for r in m):
                raise UsageError(f"{name} must be 3x3")
            object.__setattr__(self, name, tuple(tuple(_norm_scalar(v) for v in r) for r in m))
        for name in ("A", "C"):
            m = getattr(self, name)
            for i in range(3):
                for j in range(i):
                    d = m[i][j] - m[j][i]
                    if isinstance(d, float):
                        bad = abs(d) > 1e-12 * (1 + abs(m[i][j]))
                    else:
                        bad = not _is_zero(d)
                    if bad:
                        raise UsageError(f"{name} must be symmetric")

    # construction
    @classmethod
    def from_named(cls, values: Mapping[str, object] | None = None, **kw) -> "KTParams":
        vals = dict(values or {})
        vals.update(kw)
        unknown = set(vals) - set(PARAMS)
        if unknown:
            raise UsageError(f"unknown parameters {sorted(unknown)}")
        A = [[0] * 3 for _ in range(3)]
        B = [[0] * 3 for _ in range(3)]
        C = [[0] * 3 for _ in range(3)]
        for name, v in vals.items():
            if name in _A_POS:
                i, j = _A_POS[name]
                A[i][j] = A[j][i] = v
            elif name in _C_POS:
                i, j = _C_POS[name]
                C[i][j] = C[j][i] = v
            else:
                i, j = _B_POS[name]
                B[i][j] = v
        return cls(A, B, C)

    @classmethod
    def from_vector(cls, vec: Sequence) -> "KTParams":
        if len(vec) != 21:
            raise UsageError("a Killing tensor has 21 parameters")
        return cls.from_named(dict(zip(PARAMS, vec)))

    @classmethod
    def zero(cls) -> "KTParams":
        return cls.from_named({})

    @classmethod
    def metric(cls, scale=1) -> "KTParams":
        return cls.from_named(a1=scale, a2=scale, a3=scale)

    @classmethod
    def generic(cls, variables: Sequence[str] = PARAMS) -> "KTParams":
        """Symbolic tensor whose parameters are the polynomial variables themselves."""
        variables = tuple(variables)
        return cls.from_named({p: Poly.var(variables, p) for p in PARAMS})

    def named(self) -> dict[str, object]:
        out = {}
        for name, (i, j) in _A_POS.items():
            out[name] = self.A[i][j]
        for name, (i, j) in _B_POS.items():
            out[name] = self.B[i][j]
        for name, (i, j) in _C_POS.items():
            out[name] = self.C[i][j]
        return out

    def to_vector(self) -> list:
        n = self.named()
        return [n[p] for p in PARAMS]

    # algebra
    def __add__(self, other: "KTParams") -> "KTParams":
        return KTParams(_madd(self.A, other.A), _madd(self.B, other.B), _madd(self.C, other.C))

    def __sub__(self, other: "KTParams") -> "KTParams":
        return self + other.scale(-1)

    def scale(self, s) -> "KTParams":
        f = lambda m: [[v * s for v in r] for r in m]  # noqa: E731
        return KTParams(f(self.A), f(self.B), f(self.C))

    def betas(self) -> tuple:
        b = self.B
        return (b[1][1] - b[2][2], b[2][2] - b[0][0], b[0][0] - b[1][1])

    def normalized(self) -> "KTParams":
        """Same tensor with the B diagonal made trace free."""
        b = self.B
        t = b[0][0] + b[1][1] + b[2][2]
        if _is_zero(t):
            return self
        shift = t / 3 if isinstance(t, float) else (t.scale(Fraction(1, 3)) if isinstance(t, Poly)
                                                     else Fraction(t) / 3)
        B = [list(r) for r in b]
        for i in range(3):
            B[i][i] = B[i][i] - shift
        return KTParams(self.A, B, self.C)

    def is_exact(self) -> bool:
        return all(isinstance(v, (int, Fraction)) for v in self.to_vector())

    def is_constant(self) -> bool:
        n = self.normalized()
        return all(_is_zero(v) for v in n.to_vector()[6:])

    def max_abs(self) -> float:
        return max(abs(float(v)) for v in self.normalized().to_vector())

    def __eq__(self, other):
        if not isinstance(other, KTParams):
            return NotImplemented
        a, b = self.normalized(), other.normalized()
        return all(_is_zero(x - y) for x, y in zip(a.to_vector(), b.to_vector()))

    def __hash__(self):
        return hash(tuple(self.normalized().to_vector()))

    def to_float(self) -> "KTParams":
        return KTParams.from_vector([float(v) for v in self.to_vector()])

    def to_json(self) -> dict:
        n = self.named()
        f = _json_scalar
        return {"a": [f(n["a1"]), f(n["a2"]), f(n["a3"])],
                "alpha": [f(n["alpha1"]), f(n["alpha2"]), f(n["alpha3"])],
                "b": [[f(v) for v in r] for r in self.B],
                "c": [f(n["c1"]), f(n["c2"]), f(n["c3"])],
                "gamma": [f(n["gamma1"]), f(n["gamma2"]), f(n["gamma3"])]}

    @classmethod
    def from_json(cls, data: Mapping) -> "KTParams":
        try:
            g = lambda key: [_parse_json_scalar(v) for v in data.get(key, [0, 0, 0])]  # noqa: E731
            a, alpha, c, gamma = g("a"), g("alpha"), g("c"), g("gamma")
            braw = data.get("b", [[0] * 3] * 3)
            b = [[_parse_json_scalar(v) for v in r] for r in braw]
        except (TypeError, AttributeError) as exc:
            raise UsageError(f"malformed Killing tensor JSON: {exc}") from exc
        if any(len(v) != 3 for v in (a, alpha, c, gamma)) or len(b) != 3 or any(len(r) != 3 for r in b):
            raise UsageError("malformed Killing tensor JSON: wrong lengths")
        vals = dict(zip(("a1", "a2", "a3"), a))
        vals.update(zip(("alpha1", "alpha2", "alpha3"), alpha))
        vals.update(zip(("c1", "c2", "c3"), c))
        vals.update(zip(("gamma1", "gamma2", "gamma3"), gamma))
        for i in range(3):
            for j in range(3):
                vals[f"b{i + 1}{j + 1}"] = b[i][j]
        return cls.from_named(vals)

    def __repr__(self):
        nz = {k: (format_rational(v) if isinstance(v, (int, Fraction)) else v)
              for k, v in self.named().items() if not _is_zero(v)}
        return f"KTParams({nz})"


def _json_scalar(v):
    if isinstance(v, float):
        return v
    if isinstance(v, Poly):
        raise UsageError("symbolic parameters cannot be serialized")
    return format_rational(v)


def _parse_json_scalar(v):
    if isinstance(v, float):
        return v
    return as_rational(v)


# ------------------------------------------------------------------ KVParams

@dataclass(frozen=True)
class KVParams:
    a: tuple
    c: tuple

    def __post_init__(self):
        if len(self.a) != 3 or len(self.c) != 3:
            raise UsageError("Killing vector blocks must have length 3")
        object.__setattr__(self, "a", tuple(_norm_scalar(v) for v in self.a))
        object.__setattr__(self, "c", tuple(_norm_scalar(v) for v in self.c))

    @classmethod
    def from_vector(cls, v: Sequence) -> "KVParams":
        return cls(tuple(v[:3]), tuple(v[3:]))

    def to_vector(self) -> list:
        return list(self.a) + list(self.c)

    def is_zero(self) -> bool:
        return all(_is_zero(v) for v in self.to_vector())

    def __add__(self, other):
        return KVParams.from_vector([p + q for p, q in zip(self.to_vector(), other.to_vector())])

    def scale(self, s):
        return KVParams.from_vector([p * s for p in self.to_vector()])

    def to_float(self) -> "KVParams":
        return KVParams.from_vector([float(v) for v in self.to_vector()])

    def to_json(self) -> dict:
        return {"a": [_json_scalar(v) for v in self.a], "c": [_json_scalar(v) for v in self.c]}

    @classmethod
    def from_json(cls, data: Mapping) -> "KVParams":
        return cls(tuple(_parse_json_scalar(v) for v in data["a"]),
                   tuple(_parse_json_scalar(v) for v in data["c"]))


# ------------------------------------------------------------------ Isometry

def _is_float_matrix(m) -> bool:
    return any(isinstance(v, float) for r in m for v in r)


@dataclass(frozen=True)
class Isometry:
    """Proper Euclidean motion acting by ``x = lam @ xt + delta``."""

    lam: tuple
    delta: tuple

    ORTHO_TOL = 1e-10

    def __post_init__(self):
        lam = tuple(tuple(v if isinstance(v, float) else as_rational(v) for v in r) for r in self.lam)
        delta = tuple(v if isinstance(v, float) else as_rational(v) for v in self.delta)
        if len(lam) != 3 or any(len(r) != 3 for r in lam) or len(delta) != 3:
            raise UsageError("isometry needs a 3x3 rotation and a 3-vector")
        object.__setattr__(self, "lam", lam)
        object.__setattr__(self, "delta", delta)
        gram = _mm(_tr(lam), lam)
        d = det3(lam)
        if self.exact:
            if any(gram[i][j] != (1 if i == j else 0) for i in range(3) for j in range(3)) or d != 1:
                raise NotOrthogonalError("rotation is not exactly orthogonal with det +1")
        else:
            err = max(abs(float(gram[i][j]) - (1.0 if i == j else 0.0))
                      for i in range(3) for j in range(3))
            if err > self.ORTHO_TOL or abs(float(d) - 1.0) > self.ORTHO_TOL:
                raise NotOrthogonalError(f"rotation is not orthogonal (residual {err:.3g}, det {float(d):.6g})")

    @property
    def exact(self) -> bool:
        return not (_is_float_matrix(self.lam) or any(isinstance(v, float) for v in self.delta))

    @classmethod
    def identity(cls) -> "Isometry":
        return cls(((1, 0, 0), (0, 1, 0), (0, 0, 1)), (0, 0, 0))

    @classmethod
    def translation(cls, delta: Sequence) -> "Isometry":
        return cls(((1, 0, 0), (0, 1, 0), (0, 0, 1)), tuple(delta))

    @property
    def mu(self):
        """The mixing block -[delta]x lam appearing in the parameter action."""
        return [[-v for v in r] for r in _mm(cross_matrix(self.delta), self.lam)]

    def compose(self, other: "Isometry") -> "Isometry":
        """Isometry equivalent to applying ``self`` first and then ``other``."""
        lam = _mm(self.lam, other.lam)
        dl = _mv(self.lam, other.delta)
        return Isometry(lam, [dl[i] + self.delta[i] for i in range(3)])

    def inverse(self) -> "Isometry":
        lt = _tr(self.lam)
        d = _mv(lt, self.delta)
        return Isometry(lt, [-v for v in d])

    def to_float(self) -> "Isometry":
        return Isometry([[float(v) for v in r] for r in self.lam], [float(v) for v in self.delta])

    def map_point(self, xt: Sequence) -> list:
        """Old Cartesian coordinates of the point with new coordinates ``xt``."""
        v = _mv(self.lam, xt)
        return [v[i] + self.delta[i] for i in range(3)]

    def to_json(self) -> dict:
        f = (lambda v: float(v)) if not self.exact else format_rational  # noqa: E731
        return {"lambda": [[f(v) for v in r] for r in self.lam], "delta": [f(v) for v in self.delta]}

    @classmethod
    def from_json(cls, data: Mapping) -> "Isometry":
        return cls([[_parse_json_scalar(v) for v in r] for r in data["lambda"]],
                   [_parse_json_scalar(v) for v in data["delta"]])


def cayley_rotation(S: Sequence[Sequence]) -> tuple:
    """Exact rotation (I - S)(I + S)^-1 from a skew-symmetric rational matrix."""
    S = [[as_rational(v) for v in r] for r in S]
    for i in range(3):
        for j in range(3):
            if S[i][j] != -S[j][i]:
                raise UsageError("Cayley parameter must be skew-symmetric")
    I = [[int(i == j) for j in range(3)] for i in range(3)]
    minus = [[I[i][j] - S[i][j] for j in range(3)] for i in range(3)]
    plus = [[I[i][j] + S[i][j] for j in range(3)] for i in range(3)]
    lam = _mm(minus, inv3(plus))
    return tuple(tuple(_clean(v) for v in r) for r in lam)


def skew_from_vector(w: Sequence) -> list:
    return cross_matrix(w)


# ---------------------------------------------------------------- the action

def _transform_blocks(A, B, C, lam, mu):
    lt = _tr(lam)
    mt = _tr(mu)
    lbm = _mm(_mm(lt, B), mu)
    At = _madd(_mm(_mm(lt, A), lam), lbm, _tr(lbm), _mm(_mm(mt, C), mu))
    Bt = _madd(_mm(_mm(lt, B), lam), _mm(_mm(mt, C), lam))
    Ct = _mm(_mm(lt, C), lam)
    # symmetrize exactly; rounding in the float variant can leave 1e-17 asymmetry
    At = [[At[i][j] if i <= j else At[j][i] for j in range(3)] for i in range(3)]
    Ct = [[Ct[i][j] if i <= j else Ct[j][i] for j in range(3)] for i in range(3)]
    return At, Bt, Ct


def apply_isometry(K: KTParams, h: Isometry) -> KTParams:
    if not isinstance(h, Isometry):
        raise UsageError("apply_isometry expects an Isometry")
    return KTParams(*_transform_blocks(K.A, K.B, K.C, h.lam, h.mu))


def apply_isometry_kv(V: KVParams, h: Isometry) -> KVParams:
    lt = _tr(h.lam)
    mt = _tr(h.mu)
    a = _mv(lt, V.a)
    am = _mv(mt, V.c)
    return KVParams(tuple(a[i] + am[i] for i in range(3)), tuple(_mv(lt, V.c)))


# ---------------------------------------------------------- component fields

def _lift(v, variables: tuple) -> Poly:
    if isinstance(v, Poly):
        return v.embed(variables)
    return Poly.const(variables, v)


def _field_vars(values: Iterable) -> tuple:
    pv = None
    for v in values:
        if isinstance(v, Poly):
            if pv is None:
                pv = v.variables
            elif v.variables != pv:
                raise UsageError("symbolic parameters must share one variable list")
        elif isinstance(v, float):
            raise UsageError("component polynomials need exact or symbolic parameters")
    if pv is None:
        return XYZ
    if set(pv) & set(XYZ):
        raise UsageError("parameter variables must not be named x, y or z")
    return pv + XYZ


def kt_components(K: KTParams) -> list[list[Poly]]:
    """Contravariant components K^ij as polynomials in x, y, z."""
    vs = _field_vars(K.to_vector())
    A = [[_lift(v, vs) for v in r] for r in K.A]
    B = [[_lift(v, vs) for v in r] for r in K.B]
    C = [[_lift(v, vs) for v in r] for r in K.C]
    X = cross_matrix([Poly.var(vs, n) for n in XYZ])
    X = [[v if isinstance(v, Poly) else Poly.const(vs, v) for v in r] for r in X]
    BXt = _mm(B, _tr(X))
    M = _madd(A, BXt, _tr(BXt), _mm(_mm(X, C), _tr(X)))
    return [[M[i][j] if i <= j else M[j][i] for j in range(3)] for i in range(3)]


def kv_components(V: KVParams) -> list[Poly]:
    vs = _field_vars(V.to_vector())
    a = [_lift(v, vs) for v in V.a]
    c = [_lift(v, vs) for v in V.c]
    x = [Poly.var(vs, n) for n in XYZ]
    # a + x cross c
    return [a[0] + x[1] * c[2] - x[2] * c[1],
            a[1] + x[2] * c[0] - x[0] * c[2],
            a[2] + x[0] * c[1] - x[1] * c[0]]


def kt_matrix_at(K: KTParams, point: Sequence[float]):
    """Numeric K^ij at a point (float arithmetic, any scalar kind)."""
    import numpy as np
    A = np.array(K.A, dtype=float)
    B = np.array(K.B, dtype=float)
    C = np.array(K.C, dtype=float)
    X = np.array(cross_matrix([float(p) for p in point]), dtype=float)
    BXt = B @ X.T
    return A + BXt + BXt.T + X @ C @ X.T


# ------------------------------------------------------------ Nijenhuis, TSN

def _nijenhuis_doubled(Km: list[list[Poly]]) -> list[list[list[Poly]]]:
    vs = Km[0][0].variables
    dK = [[[Km[i][j].diff(n) for j in range(3)] for i in range(3)] for n in XYZ]
    zero = Poly.zero(vs)
    N = [[[zero] * 3 for _ in range(3)] for _ in range(3)]
    for i in range(3):
        for j in range(3):
            for k in range(j + 1, 3):
                t = zero
                for l in range(3):
                    t = t + Km[i][l] * (dK[k][l][j] - dK[j][l][k])
                    t = t + Km[l][j] * dK[l][i][k] - Km[l][k] * dK[l][i][j]
                N[i][j][k] = t
                N[i][k][j] = -t
    return N


def nijenhuis(K: KTParams) -> list[list[list[Poly]]]:
    """N^i_jk = K^i_l K^l_[j,k] + K^l_[j K^i_k],l  (brackets weighted by 1/2)."""
    N2 = _nijenhuis_doubled(kt_components(K))
    return [[[p.scale(Fraction(1, 2)) for p in row] for row in mat] for mat in N2]


_CYCLIC = ((0, 1, 2), (1, 2, 0), (2, 0, 1))


def tsn_polynomials(K: KTParams) -> tuple[Poly, Poly, Poly]:
    """The three scalar TSN polynomials (each the single essential component of a
    totally antisymmetric 3-form), up to nonzero constant factors."""
    Km = kt_components(K)
    N = _nijenhuis_doubled(Km)
    K2 = _mm(Km, Km)
    vs = Km[0][0].variables
    t1 = t2 = t3 = Poly.zero(vs)
    for i, j, k in _CYCLIC:
        t1 = t1 + N[i][j][k]
        for l in range(3):
            n = N[l][j][k]
            if n:
                t2 = t2 + Km[i][l] * n
                t3 = t3 + K2[i][l] * n
    return t1, t2, t3


@dataclass(frozen=True)
class TSNResult:
    conditions: tuple  # three lists of (xyz exponent tuple, coefficient) pairs
    has_normal_eigenvectors: bool

    @property
    def counts(self) -> tuple[int, int, int]:
        return tuple(len(c) for c in self.conditions)


def tsn_conditions(K: KTParams) -> TSNResult:
    """Expand the TSN identities over x, y, z monomials.

    For a symbolic tensor the coefficients are parameter polynomials (the
    equations); for a numeric one they are the nonzero residual coefficients.
    """
    polys = tsn_polynomials(K)
    conds = []
    for p in polys:
        coeffs = p.coefficients(XYZ)
        items = []
        for mono in sorted(coeffs, key=lambda e: (sum(e), e)):
            c = coeffs[mono]
            items.append((mono, c.constant_value() if c.is_constant() and not c.variables else c))
        conds.append(items)
    normal = all(p.is_zero() for p in polys)
    return TSNResult(tuple(conds), normal)


def has_normal_eigenvectors(K: KTParams) -> bool:
    return all(p.is_zero() for p in tsn_polynomials(K))


def _discriminant(M):
    p1 = M[0][0] + M[1][1] + M[2][2]
    p2 = (M[0][0] * M[1][1] - M[0][1] * M[0][1] + M[1][1] * M[2][2] - M[1][2] * M[1][2]
          + M[0][0] * M[2][2] - M[0][2] * M[0][2])
    p3 = det3(M)
    p1sq = p1 * p1
    return (18 * p1 * p2 * p3 - 4 * p1sq * p1 * p3 + p1sq * p2 * p2
            - 4 * p2 * p2 * p2 - 27 * p3 * p3)


def char_discriminant(K: KTParams) -> Poly:
    """Discriminant of det(K - t I) as a polynomial in x, y, z."""
    return _discriminant(kt_components(K))


# a nonzero value at any point already proves the discriminant is not identically zero
_PROBES = ((1, 2, 3), (-2, 1, 5), (3, -1, -4))


def has_distinct_eigenvalues(K: KTParams) -> bool:
    if K.is_exact():
        M = kt_components(K)
        for pt in _PROBES:
            at = dict(zip(XYZ, pt))
            if _discriminant([[c.evaluate(at) for c in row] for row in M]) != 0:
                return True
    return not char_discriminant(K).is_zero()


# ------------------------------------------------------------ Lie derivative

def lie_derivative(V: KVParams, K: KTParams) -> list[list[Poly]]:
    vs = _field_vars(list(V.to_vector()) + list(K.to_vector()))
    Km = [[p.embed(vs) for p in r] for r in kt_components(K)]
    Vc = [p.embed(vs) for p in kv_components(V)]
    dV = [[Vc[i].diff(n) for n in XYZ] for i in range(3)]  # dV[i][l] = d_l V^i
    out = [[None] * 3 for _ in range(3)]
    for i in range(3):
        for j in range(i, 3):
            t = Poly.zero(vs)
            for l, n in enumerate(XYZ):
                t = t + Vc[l] * Km[i][j].diff(n) - Km[l][j] * dV[i][l] - Km[i][l] * dV[j][l]
            out[i][j] = out[j][i] = t
    return out


# ------------------------------------------------------------ generators

def dtt_dimension(n: int, p: int) -> int:
    """Dimension of valence-p Killing tensors on flat n-space."""
    if not isinstance(n, int) or not isinstance(p, int) or n < 1 or p < 1:
        raise UsageError("dtt_dimension needs integers n >= 1, p >= 1")
    num = comb(n + p, p + 1) * comb(n + p - 1, p)
    if num % n:
        raise ArithmeticError("non-integral dimension")
    return num // n


_GEN_VARS = PARAMS + ("t",)


def _first_order(h_lam, h_delta) -> list[Poly]:
    K = KTParams.generic(_GEN_VARS)
    mu = [[-v for v in r] for r in _mm(cross_matrix(h_delta), h_lam)]
    At, Bt, Ct = _transform_blocks(K.A, K.B, K.C, h_lam, mu)
    tilde = KTParams(At, Bt, Ct).to_vector()
    row = []
    for p in tilde:
        p = p if isinstance(p, Poly) else Poly.const(_GEN_VARS, p)
        c = p.coefficients(("t",)).get((1,))
        row.append(c if c is not None else Poly.zero(PARAMS))
    return row


_GENERATORS = None


def generator_matrix(symbolic: bool = True):
    """6 x 21 generator rows U1, U2, U3, V1, V2, V3 over the parameter variables.

    Rows are the first-order change of the parameters under a translation
    ``delta = t e_m`` (U rows) and a rotation ``lam = I + t [e_m]x`` (V rows).
    With ``symbolic=False`` a callable evaluating the matrix at a parameter
    point is returned instead.
    """
    global _GENERATORS
    if _GENERATORS is None:
        t = Poly.var(_GEN_VARS, "t")
        one = Poly.const(_GEN_VARS, 1)
        zero = Poly.zero(_GEN_VARS)
        eye = [[one if i == j else zero for j in range(3)] for i in range(3)]
        rows = []
        for m in range(3):
            rows.append(_first_order(eye, [t if k == m else zero for k in range(3)]))
        for m in range(3):
            e = [one if k == m else zero for k in range(3)]
            w = cross_matrix(e)
            lam = [[eye[i][j] + t * w[i][j] for j in range(3)] for i in range(3)]
            rows.append(_first_order(lam, [zero] * 3))
        _GENERATORS = tuple(tuple(r) for r in rows)
    if symbolic:
        return [list(r) for r in _GENERATORS]

    def at(point: Mapping[str, object]) -> list[list]:
        return [[p.evaluate(point) for p in r] for r in _GENERATORS]
    return at


def apply_generator(row: Sequence[Poly], F: Poly) -> Poly:
    """Directional derivative of a parameter polynomial along one generator row."""
    total = Poly.zero(F.variables)
    for p, g in zip(PARAMS, row):
        if g:
            d = F.diff(p)
            if d:
                total = total + g.embed(F.variables) * d
    return total


def generator_rank(point: Mapping[str, object]) -> int:
    return rank(generator_matrix(symbolic=False)(point), 21)


# ------------------------------------------------------------ misc helpers

def translational_part(V: KVParams) -> bool:
    return all(_is_zero(c) for c in V.c)


def random_kt(rng, lo: int = -5, hi: int = 5, den: int = 3) -> KTParams:
    """Random exact tensor with small rational entries (used by tests and demos)."""
    return KTParams.from_vector([Fraction(rng.randint(lo * den, hi * den), rng.randint(1, den))
                                 for _ in range(21)])


def random_isometry(rng, span: int = 4) -> Isometry:
    """Random exact isometry: Cayley rotation plus a rational translation."""
    w = [Fraction(rng.randint(-span, span), rng.randint(1, span)) for _ in range(3)]
    lam = cayley_rotation(cross_matrix(w))
    delta = [Fraction(rng.randint(-3 * span, 3 * span), rng.randint(1, span)) for _ in range(3)]
    return Isometry(lam, delta)
