"""Isometry invariants of Killing vectors and Killing tensors on E^3.

The fifteen full-space invariants are stored once, as sums of contraction
terms over the blocks A, B, C and the Levi-Civita symbol E.  Each term is a
coefficient followed by factors ``T:ij`` (block T, indices i, j in slot order);
repeated letters are summed over 1..3.  Antisymmetrization and
symmetrization brackets are already expanded with 1/k! weights.

The same table drives numeric evaluation (exact rationals or floats) and the
symbolic 21-variable polynomials used by the generator tests.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Sequence

from .exactmath import Poly, UsageError, _clean
from .killing import PARAMS, KTParams, KVParams, _is_zero

DELTA_TABLE: dict[int, list[str]] = {
    1: ["B:ii"],
    2: ["C:ii"],
    3: ["B:ij C:ij"],
    4: ["C:ij C:ij"],
    5: ["B:ij B:ji", "A:ij C:ij"],
    6: ["B:ij C:jk C:ki"],
    7: ["C:ij C:jk C:ki"],
    8: ["C:ij B:jk B:ik", "2 C:ij B:jk B:ki", "C:ij A:jk C:ki"],
    9: ["E:ikm E:jln B:ij B:kl B:mn",
        "-1 B:ii B:jj B:kk", "B:ij B:ji B:kk",
        "-2 A:ij C:ij B:kk",
        "6 B:ij A:jk C:ki"],
    10: ["B:ij B:ik C:kj", "-2 B:ij B:jk C:ki",
         "-1 B:ij B:ij C:kk", "-1 A:ij C:ij C:kk",
         "1/2 A:ii C:jj C:kk", "-1/2 A:ii C:jk C:kj"],
    11: ["E:ilm E:jkp B:ij B:kl C:mn C:np",
         "B:ij B:ij C:kl C:kl",
         "-1 B:ij C:jk C:kl B:il",
         "-2 B:ij C:jk C:kl B:li", "2 B:ij C:jk C:ll B:ki",
         "1/2 A:ij C:ij C:kk C:ll", "-1/2 A:ij C:ij C:kl C:lk"],
    12: ["A:ii C:jj C:kk C:ll", "3 A:ii C:jk C:jk C:ll", "-4 A:ii C:jk C:kl C:lj",
         "-6 A:ij C:ij C:kl C:kl",
         "6 B:ij B:ij C:kl C:kl",
         "-6 B:ij C:jk B:ik C:ll", "12 B:ij C:jk B:ki C:ll",
         "-24 B:ij C:jk C:kl B:li",
         "12 E:ilm E:jkp B:ij B:kl C:mn C:np"],
    13: ["1/2 A:ij B:ij C:kk C:ll", "-1/2 A:ij B:ij C:kl C:lk",
         "A:ij B:jk C:kl C:li",
         "-1 A:ij C:ij B:kk C:ll", "-1 A:ij C:ik B:jk C:ll",
         "A:ii C:jk B:jk C:ll", "-1 A:ii C:jk B:kl C:lj",
         "-1 B:ij B:ij B:kl C:kl",
         "-2 B:ij C:jk B:ki B:ll",
         "-1 B:ij B:jk B:ik C:ll",
         "B:ij B:jk B:il C:kl", "B:ij B:ik B:lj C:kl"],
    14: ["A:ii A:jj C:kk C:ll", "-1 A:ii A:jj C:kl C:lk",
         "-1 A:ij A:ji C:kk C:ll", "A:ij A:ji C:kl C:lk",
         "4 A:ij A:jk C:ki C:ll", "-4 A:ij A:jk C:kl C:il",
         "4 A:ij A:kk C:jl C:li", "-4 A:ij A:kk C:ll C:ji",
         "A:ij C:ij A:kl C:kl",
         "2 A:ij C:ij B:kk B:ll", "-2 A:ij C:ij B:kl B:lk",
         "4 C:ij B:jk A:kl B:il",
         "8 A:ij C:jk B:kl B:li", "-8 A:ij C:jk B:ll B:ki"],
    15: ["A:ij C:ij C:kk C:ll C:mm", "-3 A:ij C:ij C:kl C:kl C:mm",
         "2 A:ij C:ij C:kl C:lm C:mk",
         "-3 A:ij C:jk C:ki C:ll C:mm", "3 A:ij C:jk C:ki C:lm C:ml",
         "-6 C:ij B:jk C:kl B:il C:mm", "6 C:ij B:jk C:kl B:im C:ml",
         "-12 C:ij B:jk B:kl C:il C:mm", "12 C:ij B:jk B:kl C:im C:ml"],
}


def _parse_term(text: str) -> tuple[Fraction, list[tuple[str, str]]]:
    parts = text.split()
    coef = Fraction(1)
    if ":" not in parts[0]:
        coef = Fraction(parts[0])
        parts = parts[1:]
    factors = []
    for p in parts:
        name, idx = p.split(":")
        factors.append((name, idx))
    return coef, factors


_PARSED = {k: [_parse_term(t) for t in v] for k, v in DELTA_TABLE.items()}


def _levi(i: int, j: int, k: int) -> int:
    if i == j or j == k or i == k:
        return 0
    return 1 if (i, j, k) in ((0, 1, 2), (1, 2, 0), (2, 0, 1)) else -1


def _contract(coef, factors, blocks) -> object:
    letters: list[str] = []
    for _, idx in factors:
        for ch in idx:
            if ch not in letters:
                letters.append(ch)
    # a factor can be evaluated once all its letters are bound
    ready_at = {}
    for f in factors:
        depth = max(letters.index(ch) for ch in f[1])
        ready_at.setdefault(depth, []).append(f)
    assign: dict[str, int] = {}
    total = None

    def value(f):
        name, idx = f
        ix = [assign[ch] for ch in idx]
        if name == "E":
            return _levi(*ix)
        m = blocks[name]
        return m[ix[0]][ix[1]]

    def rec(depth, acc):
        nonlocal total
        if depth == len(letters):
            total = acc if total is None else total + acc
            return
        for v in range(3):
            assign[letters[depth]] = v
            cur = acc
            dead = False
            for f in ready_at.get(depth, ()):
                val = value(f)
                if _is_zero(val):
                    dead = True
                    break
                cur = cur * val
            if not dead:
                rec(depth + 1, cur)
        del assign[letters[depth]]

    rec(0, coef)
    return 0 if total is None else total


def _eval_delta(k: int, blocks) -> object:
    total = 0
    for coef, factors in _PARSED[k]:
        total = total + _contract(coef, factors, blocks)
    if isinstance(total, Fraction):
        return _clean(total)
    return total


# every term of a given invariant has the same number of A, B, C factors
_DEGREE = {k: sum(1 for name, _ in terms[0][1] if name != "E") for k, terms in _PARSED.items()}


def _integer_blocks(blocks) -> tuple[dict, int] | None:
    """Blocks scaled by a common denominator L to plain ints, or None if any entry is a float."""
    L = 1
    for m in blocks.values():
        for r in m:
            for v in r:
                if isinstance(v, float):
                    return None
                if isinstance(v, Fraction):
                    L = L * v.denominator // math.gcd(L, v.denominator)
    return {n: [[int(v * L) for v in r] for r in m] for n, m in blocks.items()}, L


def _eval_delta_exact(k: int, scaled: dict, L: int) -> object:
    # homogeneity: Delta_k(blocks) = Delta_k(L * blocks) / L^degree, evaluated on ints
    total = Fraction(0)
    for coef, factors in _PARSED[k]:
        total += coef * _contract(1, factors, scaled)
    return _clean(total / L ** _DEGREE[k])


# ------------------------------------------------------------------ results

@dataclass(frozen=True)
class InvariantVector:
    kind: str
    values: tuple

    def __getitem__(self, i: int):
        """1-based access mirroring the conventional numbering."""
        return self.values[i - 1]

    def labels(self) -> list[str]:
        prefix = "Xi" if self.kind == "xi" else "Delta"
        return [f"{prefix}{i + 1}" for i in range(len(self.values))]

    def to_json(self) -> dict:
        from .exactmath import format_rational
        out = {}
        for lab, v in zip(self.labels(), self.values):
            out[lab] = v if isinstance(v, float) else format_rational(v)
        return {"kind": self.kind, "values": out}


def kv_invariants(V: KVParams) -> InvariantVector:
    c, a = V.c, V.a
    d1 = _clean(sum((c[i] * c[i] for i in range(3)), 0))
    d2 = _clean(sum((a[i] * c[i] for i in range(3)), 0))
    return InvariantVector("kv", (d1, d2))


def extract_bii(beta: Sequence) -> tuple:
    b1, b2, b3 = beta
    if not _is_zero(b1 + b2 + b3):
        if not (isinstance(b1 + b2 + b3, float) and abs(b1 + b2 + b3) < 1e-12 * (1 + abs(b1) + abs(b2))):
            raise UsageError("beta components must sum to zero")

    def third(v):
        if isinstance(v, (float, Poly)):
            return v * (1 / 3) if isinstance(v, float) else v.scale(Fraction(1, 3))
        return _clean(Fraction(v) / 3)
    return (third(b3 - b2), third(b1 - b3), third(b2 - b1))


def _blocks_for(K: KTParams) -> dict:
    b11, b22, b33 = extract_bii(K.betas())
    B = [list(r) for r in K.B]
    B[0][0], B[1][1], B[2][2] = b11, b22, b33
    return {"A": K.A, "B": B, "C": K.C}


def full_invariants(K: KTParams, which: Sequence[int] | None = None) -> InvariantVector:
    """All fifteen invariants (or a chosen subset, others reported as None)."""
    blocks = _blocks_for(K)
    idx = range(1, 16) if which is None else which
    scaled = _integer_blocks(blocks)
    vals = [None] * 15
    for k in idx:
        vals[k - 1] = _eval_delta(k, blocks) if scaled is None else _eval_delta_exact(k, *scaled)
    return InvariantVector("full", tuple(vals))


def delta_polynomials() -> list[Poly]:
    """Each invariant as a polynomial in the 21 parameter variables."""
    G = KTParams.generic(PARAMS)
    blocks = _blocks_for(G)
    out = []
    for k in range(1, 16):
        v = _eval_delta(k, blocks)
        out.append(v if isinstance(v, Poly) else Poly.const(PARAMS, v))
    return out


# ----------------------------------------------------------- subspace forms

_T_ALLOWED = {"a1", "a2", "a3", "alpha3", "b13", "b23", "c3"}
_R_FREE = {"a1", "a2", "a3", "b12", "b21", "c1", "c2", "c3"}


def _near_zero(v, tol: float | None) -> bool:
    if tol is None or not isinstance(v, float):
        return _is_zero(v)
    return abs(v) <= tol


def check_translational_form(K: KTParams, tol: float | None = None) -> None:
    n = K.normalized().named()
    bad = [k for k, v in n.items() if k not in _T_ALLOWED and not _near_zero(v, tol)]
    if bad:
        raise UsageError(f"not in the translational normal form (nonzero {bad})")


def check_rotational_form(K: KTParams, tol: float | None = None) -> None:
    n = K.normalized().named()
    bad = [k for k, v in n.items() if k not in _R_FREE and not _near_zero(v, tol)]
    for p, q in (("a1", "a2"), ("c1", "c2")):
        if not _near_zero(n[p] - n[q], tol):
            bad.append(f"{p}-{q}")
    if not _near_zero(n["b12"] + n["b21"], tol):
        bad.append("b12+b21")
    if bad:
        raise UsageError(f"not in the rotational normal form (violations {bad})")


def translational_invariants(K: KTParams, tol: float | None = None) -> InvariantVector:
    check_translational_form(K, tol)
    n = K.named()
    a1, a2 = n["a1"], n["a2"]
    b13, b23, c3, al3 = n["b13"], n["b23"], n["c3"], n["alpha3"]
    s1 = b13 * b13 - b23 * b23 + c3 * (a2 - a1)
    s2 = b13 * b23 - al3 * c3
    return InvariantVector("translational", (_clean(c3), _clean(s1 * s1 + 4 * s2 * s2)))


def rotational_invariants(K: KTParams, tol: float | None = None) -> InvariantVector:
    check_rotational_form(K, tol)
    n = K.named()
    c2, b12, a1, a3, c3 = n["c2"], n["b12"], n["a1"], n["a3"], n["c3"]
    return InvariantVector("rotational",
                           (_clean(c2), _clean(b12 * b12 + c2 * (a3 - a1)), _clean(a3), _clean(c3)))


def xi_invariants(delta: InvariantVector | Sequence) -> InvariantVector:
    d = delta.values if isinstance(delta, InvariantVector) else tuple(delta)
    if len(d) != 15 or any(v is None for v in d):
        raise UsageError("xi_invariants needs all fifteen Delta values")
    D = (None,) + tuple(d)
    x1 = D[2] ** 2 - D[4]
    x2 = D[2] ** 3 - D[7]
    x3 = 3 * D[4] - D[2] ** 2
    x4 = D[2] * D[5] - 3 * D[8] - 2 * D[10]
    x5 = D[2] * D[10] + D[4] * D[5] - D[11]
    x6 = (D[2] * (2 * D[2] * (10 * D[2] * D[5] + 24 * D[8] - 3 * D[10]) - 72 * D[11] + D[12])
          - 48 * D[4] * D[8] - 20 * D[5] * D[7] + 16 * D[15])
    return InvariantVector("xi", tuple(_clean(v) for v in (x1, x2, x3, x4, x5, x6)))


def xi_from_tensor(K: KTParams) -> InvariantVector:
    return xi_invariants(full_invariants(K))
