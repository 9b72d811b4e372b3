"""From a potential to its orthogonally separable coordinate systems."""

from __future__ import annotations

import itertools
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from functools import reduce
from typing import Sequence

import numpy as np

from .canonical import SeparableChart, chart_pushforward_check, sample_chart_point, to_canonical
from .classify import ClassificationReport, DomainError, WebClass, classify_web
from .exactmath import Poly, RatFun, UsageError, _clean, nullspace, rref
from .killing import (PARAMS, XYZ, Isometry, KTParams, KVParams, apply_isometry,
                      has_distinct_eigenvalues,
                      has_normal_eigenvectors, kt_components, lie_derivative, tsn_polynomials)

_UNITS = [KTParams.from_vector([int(i == k) for i in range(21)]) for k in range(21)]
_TRACE_ROW = [1 if p in ("b11", "b22", "b33") else 0 for p in PARAMS]


@dataclass
class CompatibleSpace:
    basis: list
    metric_index: int | None = None

    @property
    def dimension(self) -> int:
        return len(self.basis)

    def non_metric(self) -> list:
        return [K for i, K in enumerate(self.basis) if i != self.metric_index]

    def to_json(self) -> dict:
        return {"dimension": self.dimension, "metric_index": self.metric_index,
                "basis": [K.to_json() for K in self.basis]}


def _as_ratfun(V) -> RatFun:
    if isinstance(V, RatFun):
        return V
    if isinstance(V, Poly):
        return RatFun(V)
    raise UsageError("the potential must be a rational function of x, y, z")


def _curl_numerators(K: KTParams, P: list, D: Poly, dD: list) -> list:
    """Numerators of the three components of d(K dV) for V = N/D, P_i = D d_iN - N d_iD."""
    Km = kt_components(K)
    Q = [reduce(lambda s, i: s + Km[j][i] * P[i], range(3), Poly.zero(XYZ)) for j in range(3)]
    out = []
    for j, k in ((0, 1), (1, 2), (2, 0)):
        curl = Q[j].diff(XYZ[k]) - Q[k].diff(XYZ[j])
        out.append(curl * D - (Q[j] * dD[k] - Q[k] * dD[j]) * 2)
    return out


def compatibility_equations(V) -> list[list]:
    """Exact linear system (rows over the 21 parameters) for d(K dV) = 0."""
    V = _as_ratfun(V)
    N, D = V.num.embed(XYZ), V.den.embed(XYZ)
    dN = [N.diff(n) for n in XYZ]
    dD = [D.diff(n) for n in XYZ]
    P = [dN[i] * D - N * dD[i] for i in range(3)]
    columns = []
    for U in _UNITS:
        col = {}
        for comp, num in enumerate(_curl_numerators(U, P, D, dD)):
            for mono, c in num.terms().items():
                col[(comp, mono)] = c
        columns.append(col)
    keys = sorted({k for col in columns for k in col})
    rows = [[col.get(k, 0) for col in columns] for k in keys]
    rows.append(list(_TRACE_ROW))
    return rows


def compatibility_space(V) -> CompatibleSpace:
    basis = [KTParams.from_vector(v) for v in nullspace(compatibility_equations(V), 21)]
    metric = KTParams.metric()
    idx = None
    for i, K in enumerate(basis):
        if K.normalized().to_vector() == metric.to_vector():
            idx = i
            break
    return CompatibleSpace(basis, idx)


def is_compatible(K: KTParams, V) -> bool:
    V = _as_ratfun(V)
    N, D = V.num.embed(XYZ), V.den.embed(XYZ)
    dD = [D.diff(n) for n in XYZ]
    P = [N.diff(n) * D - N * dD[i] for i, n in enumerate(XYZ)]
    return all(c.is_zero() for c in _curl_numerators(K, P, D, dD))


def is_ckt(K: KTParams) -> bool:
    return has_normal_eigenvectors(K) and has_distinct_eigenvalues(K)


def extract_ckts(space: CompatibleSpace) -> list:
    return [K for K in space.basis if is_ckt(K)]


# --------------------------------------------------------- combinations

@dataclass(frozen=True)
class CombinationPolicy:
    range: int = 2
    max_workers: int | None = None

    def __post_init__(self):
        if not isinstance(self.range, int) or self.range < 0:
            raise UsageError("combination range must be a nonnegative integer")


@dataclass
class Discovery:
    coefficients: tuple
    tensor: KTParams
    report: ClassificationReport
    chart: SeparableChart

    def to_json(self) -> dict:
        return {"coefficients": list(self.coefficients),
                "tensor": self.tensor.to_json(),
                "web": self.report.web.value,
                "chart": self.chart.describe()}


def _coefficient_grid(n: int, r: int):
    """Primitive integer vectors in [-r, r]^n, one per sign class, sorted."""
    out = []
    for v in itertools.product(range(-r, r + 1), repeat=n):
        nz = [x for x in v if x]
        if not nz or nz[0] < 0:
            continue
        if reduce(math.gcd, (abs(x) for x in nz)) != 1:
            continue
        out.append(v)
    out.sort(key=lambda v: (sum(1 for x in v if x), [abs(x) for x in v], v))
    return out


def _combine(gens: Sequence[KTParams], coeffs: Sequence[int]) -> KTParams:
    vec = [0] * 21
    for c, K in zip(coeffs, gens):
        if c:
            vec = [a + c * b for a, b in zip(vec, K.to_vector())]
    return KTParams.from_vector(vec)


class _NormalityFilter:
    """TSN conditions of sum_i l_i K_i as polynomials in the l_i, expanded once.

    A combination has normal eigenvectors iff every polynomial vanishes at
    its coefficient vector, so each candidate costs a few evaluations.
    """

    def __init__(self, gens: Sequence[KTParams]):
        self.names = tuple(f"l{i}" for i in range(len(gens)))
        ls = Poly.gens(self.names)
        vec = [Poly.zero(self.names)] * 21
        for l, K in zip(ls, gens):
            vec = [a + l * b for a, b in zip(vec, K.to_vector())]
        eqs = set()
        for t in tsn_polynomials(KTParams.from_vector(vec)):
            for c in t.coefficients(XYZ).values():
                eqs.add(c.embed(self.names))
        self.equations = sorted(eqs, key=lambda q: (len(q.terms()), str(q)))

    def __call__(self, coeffs: Sequence[int]) -> bool:
        at = dict(zip(self.names, coeffs))
        return all(q.evaluate(at) == 0 for q in self.equations)


def _analyze(K: KTParams, normal: bool | None = None) -> tuple | None:
    if normal is None:
        normal = has_normal_eigenvectors(K)
    if not normal or not has_distinct_eigenvalues(K):
        return None
    try:
        report = classify_web(K, check=False)
        chart = to_canonical(K, report=report)
    except DomainError:
        return None
    return report, chart


def _analyze_task(args):
    coeffs, vec = args
    return coeffs, _analyze(KTParams.from_vector(vec), True)


def _lines_match(u, v, tol) -> bool:
    return abs(abs(float(np.dot(u, v))) - 1.0) <= tol


def charts_equivalent(c1: SeparableChart, c2: SeparableChart, tol: float = 1e-7) -> bool:
    """Same web and frames agreeing up to the web's own symmetries."""
    if c1.web != c2.web:
        return False
    L1, L2 = np.array(c1.frame.lam, dtype=float), np.array(c2.frame.lam, dtype=float)
    d = np.array(c2.frame.delta, dtype=float) - np.array(c1.frame.delta, dtype=float)
    axis = L1[:, 2]
    web = c1.web
    if web == WebClass.CARTESIAN:
        return all(any(_lines_match(L1[:, i], L2[:, j], tol) for j in range(3)) for i in range(3))
    if not _lines_match(axis, L2[:, 2], tol):
        return False
    d_perp = d - np.dot(d, axis) * axis
    if web == WebClass.CIRCULAR_CYLINDRICAL:
        return np.linalg.norm(d_perp) <= tol * max(1.0, np.linalg.norm(d))
    if web.group == "translational":
        return (np.linalg.norm(d_perp) <= tol * max(1.0, np.linalg.norm(d))
                and _lines_match(L1[:, 0], L2[:, 0], tol))
    if web.group == "rotational":
        return np.linalg.norm(d) <= tol * max(1.0, np.abs(c1.frame.delta).max())
    return (np.linalg.norm(d) <= tol * max(1.0, np.abs(c1.frame.delta).max())
            and all(_lines_match(L1[:, i], L2[:, i], tol) for i in range(2)))


def _workers(policy: CombinationPolicy) -> int:
    cap = policy.max_workers or os.cpu_count() or 1
    env = os.environ.get("KILLINGWEB_THREADS")
    if env:
        try:
            cap = min(cap, max(1, int(env)))
        except ValueError:
            raise UsageError("KILLINGWEB_THREADS must be an integer") from None
    return max(1, cap)


def _lie_rows(pairs: Sequence[tuple]) -> list[list]:
    """Linear system whose column k holds the coefficients of L_V(K) for pairs[k] = (V, K)."""
    columns = []
    for V, K in pairs:
        L = lie_derivative(V, K)
        col = {}
        for i in range(3):
            for j in range(i, 3):
                for mono, c in L[i][j].terms().items():
                    col[(i, j, mono)] = c
        columns.append(col)
    keys = sorted({k for col in columns for k in col})
    return [[col.get(k, 0) for col in columns] for k in keys]


def common_symmetries(space: CompatibleSpace) -> list[KVParams]:
    """Killing vectors preserving every tensor of the space."""
    if not space.basis:
        return []
    units = [KVParams.from_vector([int(i == k) for i in range(6)]) for k in range(6)]
    rows = []
    for K in space.basis:
        rows.extend(_lie_rows([(V, K) for V in units]))
    return [KVParams.from_vector(v) for v in nullspace(rows, 6)]


def _axial_subspaces(space: CompatibleSpace) -> list[list]:
    """Coefficient vectors spanning the tensors invariant under translation
    along the axis of each common rotational or helicoidal symmetry."""
    out = []
    for V in common_symmetries(space):
        if all(c == 0 for c in V.c):
            continue
        T = KVParams(tuple(V.c), (0, 0, 0))
        sub = nullspace(_lie_rows([(T, K) for K in space.basis]), space.dimension)
        sub = [t for t in sub
               if not (space.metric_index is not None
                       and all((x != 0) == (i == space.metric_index) for i, x in enumerate(t)))]
        if sub and sub not in out:
            out.append(sub)
    return out


def _centred_bases(space: CompatibleSpace) -> list[list]:
    """The basis re-reduced in a frame whose origin lies on a common rotation
    axis, as coefficient vectors over the original basis.

    The integer grid depends on the basis; tensors centred on the axis (the
    spherical and spheroidal ones) are only reachable with small coefficients
    when the axis runs through the origin.  Axes already doing so are skipped.
    """
    out = []
    n = space.dimension
    metric = KTParams.metric().to_vector()
    for V in common_symmetries(space):
        a, c = V.a, V.c
        cc = sum(Fraction(x) * x for x in c)
        if cc == 0:
            continue
        # nearest axis point to the origin, solving a + p x c = 0 across the axis
        p = [_clean(Fraction(a[i] * c[j] - a[j] * c[i]) / cc) for i, j in ((1, 2), (2, 0), (0, 1))]
        if not any(p):
            continue
        h = Isometry(Isometry.identity().lam, tuple(p))
        m = space.metric_index
        rows = []
        for k, K in enumerate(space.basis):
            if k == m:
                continue
            row = apply_isometry(K, h).normalized().to_vector() + [int(i == k) for i in range(n)]
            if m is not None:
                # adding the metric never changes the web: reduce it away on a1
                f = row[0]
                row = [x - f * g for x, g in zip(row, metric + [int(i == m) for i in range(n)])]
            rows.append(row)
        dirs = [tuple(r[21:]) for r in rref(rows)[0]]
        if dirs and dirs not in out:
            out.append(dirs)
    return out


def _full(space: CompatibleSpace, t: Sequence) -> KTParams:
    return _combine(space.basis, t)


def _search(space, directions, grid, policy, charts, found) -> int:
    """Classify sum_k v_k directions[k] for v in grid, appending new discoveries."""
    gens = [_full(space, d) for d in directions]
    normal = _NormalityFilter(gens)
    grid = [v for v in grid if normal(v)]
    tasks = [(v, _combine(gens, v).to_vector()) for v in grid]
    workers = _workers(policy)
    if workers > 1 and len(tasks) > 32:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_analyze_task, tasks, chunksize=16))
    else:
        results = [_analyze_task(t) for t in tasks]
    order = {v: i for i, v in enumerate(grid)}
    results.sort(key=lambda r: order[r[0]])
    for v, res in results:
        if res is None:
            continue
        report, chart = res
        if any(charts_equivalent(chart, c) for c in charts):
            continue
        charts.append(chart)
        t = [_clean(sum(Fraction(x) * d[i] for x, d in zip(v, directions)))
             for i in range(space.dimension)]
        found.append(Discovery(tuple(t), _combine(gens, v), report, chart))
    return len(tasks)


def combination_search(space: CompatibleSpace, policy: CombinationPolicy | None = None,
                       known: Sequence[SeparableChart] = ()) -> tuple[list, int]:
    """New CKTs among integer combinations of basis tensors.

    Three grids are searched: combinations of the non-metric basis (single
    basis elements excluded, they are the basis itself), the same basis
    re-reduced about each common rotation axis that misses the origin, and
    combinations of the tensors invariant under translation along such an axis.
    Returns (discoveries, number of normal candidates classified); the
    discoveries' coefficients refer to the full basis, metric included.
    """
    policy = policy or CombinationPolicy()
    if policy.range == 0 or space.dimension == 0:
        return [], 0
    charts = list(known)
    found: list = []
    tried = 0
    n = space.dimension
    dirs = [tuple(int(i == k) for i in range(n)) for k in range(n) if k != space.metric_index]
    if len(dirs) >= 2:
        grid = [v for v in _coefficient_grid(len(dirs), policy.range)
                if sum(1 for x in v if x) > 1]
        tried += _search(space, dirs, grid, policy, charts, found)
    for dirs in _centred_bases(space):
        tried += _search(space, list(dirs), _coefficient_grid(len(dirs), policy.range), policy,
                         charts, found)
    for sub in _axial_subspaces(space):
        tried += _search(space, [tuple(t) for t in sub],
                         _coefficient_grid(len(sub), policy.range), policy, charts, found)
    return found, tried


# ---------------------------------------------------------------- driver

@dataclass
class SeparabilityReport:
    potential: str
    compatible_space: CompatibleSpace
    ckts: list = field(default_factory=list)
    combinations_tried: int = 0

    @property
    def distinct_webs(self) -> list:
        seen = []
        for d in self.ckts:
            if d.report.web not in seen:
                seen.append(d.report.web)
        return sorted(seen, key=lambda w: list(WebClass).index(w))

    def to_json(self) -> dict:
        return {"potential": self.potential,
                "compatible_space": self.compatible_space.to_json(),
                "ckts": [d.to_json() for d in self.ckts],
                "combinations_tried": self.combinations_tried,
                "distinct_webs": [w.value for w in self.distinct_webs]}


def find_separable_webs(V, policy: CombinationPolicy | None = None,
                        potential_text: str | None = None) -> SeparabilityReport:
    V = _as_ratfun(V)
    space = compatibility_space(V)
    gens = space.non_metric()
    found = []
    for idx, K in enumerate(gens):
        res = _analyze(K)
        if res is None:
            continue
        report, chart = res
        if any(charts_equivalent(chart, d.chart) for d in found):
            continue
        found.append(Discovery(_unit(space, K), K, report, chart))
    extra, tried = combination_search(space, policy, [d.chart for d in found])
    text = potential_text if potential_text is not None else str(V)
    return SeparabilityReport(text, space, found + extra, tried)


def _unit(space: CompatibleSpace, K: KTParams) -> tuple:
    return tuple(int(B is K) for B in space.basis)


def verify_discovery(d: Discovery, V, rng, points: int = 5) -> float:
    """Exact compatibility re-check plus the worst chart off-diagonal at sampled points."""
    if not is_compatible(d.tensor, V):
        raise DomainError("discovered tensor is not compatible with the potential")
    worst = 0.0
    for _ in range(points):
        u = sample_chart_point(d.chart, rng)
        worst = max(worst, chart_pushforward_check(d.tensor, d.chart, u))
    return worst


__all__ = ["CompatibleSpace", "CombinationPolicy", "Discovery", "SeparabilityReport",
           "compatibility_equations", "compatibility_space", "extract_ckts", "is_ckt",
           "is_compatible", "combination_search", "common_symmetries", "charts_equivalent",
           "find_separable_webs", "verify_discovery"]
