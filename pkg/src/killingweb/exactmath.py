"""Exact rational arithmetic: sparse polynomials, rational functions, RREF.

Coefficients are Python ``int`` or ``fractions.Fraction``.  Monomials are
packed into a single integer with ``_BITS`` bits per variable, the first
declared variable occupying the lowest bits.  Term order is graded
lexicographic with the declared variable order (first variable most
significant).
"""

from __future__ import annotations

from fractions import Fraction
from math import gcd as _igcd
from typing import Iterable, Mapping, Sequence

Rational = Fraction

_BITS = 16
_MASK = (1 << _BITS) - 1


class UsageError(ValueError):
    """Raised for malformed calls (mismatched variables, missing bindings)."""


# ---------------------------------------------------------------- rationals

def as_rational(value) -> Fraction | int:
    """Coerce int, Fraction or a "p/q" string into an exact scalar."""
    if isinstance(value, bool):
        raise UsageError("booleans are not rationals")
    if isinstance(value, int):
        return value
    if isinstance(value, Fraction):
        return value.numerator if value.denominator == 1 else value
    if isinstance(value, str):
        s = value.strip()
        if not s or any(ch in s for ch in ".eE"):
            raise UsageError(f"not an exact rational: {value!r}")
        try:
            q = Fraction(s)
        except (ValueError, ZeroDivisionError) as exc:
            raise UsageError(f"not an exact rational: {value!r}") from exc
        return q.numerator if q.denominator == 1 else q
    raise UsageError(f"not an exact rational: {value!r}")


def format_rational(q) -> str:
    q = Fraction(q)
    if q.denominator == 1:
        return str(q.numerator)
    return f"{q.numerator}/{q.denominator}"


def _clean(c):
    if type(c) is Fraction and c.denominator == 1:
        return c.numerator
    return c


def _is_scalar(v) -> bool:
    return isinstance(v, (int, Fraction)) and not isinstance(v, bool)


# ------------------------------------------------------------ packed monomials

def _pack(exps: Sequence[int]) -> int:
    key = 0
    for i, e in enumerate(exps):
        if e < 0 or e > _MASK:
            raise UsageError(f"exponent out of range: {e}")
        key |= e << (_BITS * i)
    return key


def _unpack(key: int, n: int) -> tuple[int, ...]:
    return tuple((key >> (_BITS * i)) & _MASK for i in range(n))


def _order_key(key: int, n: int):
    e = _unpack(key, n)
    return (sum(e), e)


# ---------------------------------------------------------------- polynomials

class Poly:
    """Immutable sparse polynomial over a declared, ordered variable list."""

    __slots__ = ("variables", "_t", "_hash")

    def __init__(self, variables: Iterable[str], terms: Mapping | None = None):
        variables = tuple(variables)
        if len(set(variables)) != len(variables):
            raise UsageError("duplicate variable names")
        t = {}
        for exps, c in (terms or {}).items():
            exps = tuple(exps)
            if len(exps) != len(variables):
                raise UsageError("exponent vector length does not match variables")
            c = as_rational(c)
            if c:
                k = _pack(exps)
                t[k] = _clean(t.get(k, 0) + c)
                if not t[k]:
                    del t[k]
        self.variables = variables
        self._t = t
        self._hash = None

    @classmethod
    def _raw(cls, variables: tuple, t: dict) -> "Poly":
        p = object.__new__(cls)
        p.variables = variables
        p._t = t
        p._hash = None
        return p

    @classmethod
    def const(cls, variables: Iterable[str], c) -> "Poly":
        c = as_rational(c)
        return cls._raw(tuple(variables), {0: c} if c else {})

    @classmethod
    def zero(cls, variables: Iterable[str]) -> "Poly":
        return cls._raw(tuple(variables), {})

    @classmethod
    def var(cls, variables: Iterable[str], name: str) -> "Poly":
        variables = tuple(variables)
        if name not in variables:
            raise UsageError(f"unknown variable {name!r}")
        return cls._raw(variables, {1 << (_BITS * variables.index(name)): 1})

    @classmethod
    def gens(cls, variables: Iterable[str]) -> tuple["Poly", ...]:
        variables = tuple(variables)
        return tuple(cls.var(variables, v) for v in variables)

    # -- inspection

    def terms(self) -> dict[tuple[int, ...], Fraction | int]:
        n = len(self.variables)
        return {_unpack(k, n): c for k, c in self._t.items()}

    def sorted_terms(self) -> list[tuple[tuple[int, ...], Fraction | int]]:
        """Terms in descending graded-lex order (leading term first)."""
        n = len(self.variables)
        keys = sorted(self._t, key=lambda k: _order_key(k, n), reverse=True)
        return [(_unpack(k, n), self._t[k]) for k in keys]

    def __len__(self) -> int:
        return len(self._t)

    def is_zero(self) -> bool:
        return not self._t

    __bool__ = lambda self: bool(self._t)  # noqa: E731

    def is_constant(self) -> bool:
        return not self._t or (len(self._t) == 1 and 0 in self._t)

    def constant_value(self):
        if not self.is_constant():
            raise UsageError("polynomial is not constant")
        return self._t.get(0, 0)

    def leading(self) -> tuple[tuple[int, ...], Fraction | int]:
        if not self._t:
            raise UsageError("zero polynomial has no leading term")
        n = len(self.variables)
        k = max(self._t, key=lambda k: _order_key(k, n))
        return _unpack(k, n), self._t[k]

    def leading_coefficient(self):
        return self.leading()[1]

    def total_degree(self) -> int:
        if not self._t:
            return -1
        n = len(self.variables)
        return max(sum(_unpack(k, n)) for k in self._t)

    def degree_in(self, name: str) -> int:
        i = self._index(name)
        if not self._t:
            return -1
        return max((k >> (_BITS * i)) & _MASK for k in self._t)

    def used_variables(self) -> tuple[str, ...]:
        n = len(self.variables)
        seen = [False] * n
        for k in self._t:
            for i in range(n):
                if (k >> (_BITS * i)) & _MASK:
                    seen[i] = True
        return tuple(v for v, s in zip(self.variables, seen) if s)

    def _index(self, name: str) -> int:
        try:
            return self.variables.index(name)
        except ValueError:
            raise UsageError(f"unknown variable {name!r}") from None

    # -- ring operations

    def _coerce(self, other) -> "Poly | None":
        if isinstance(other, Poly):
            if other.variables != self.variables:
                raise UsageError(
                    f"variable lists differ: {self.variables} vs {other.variables}")
            return other
        if _is_scalar(other):
            return Poly.const(self.variables, other)
        return None

    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        r = dict(self._t)
        for k, c in o._t.items():
            v = r.get(k)
            if v is None:
                r[k] = c
            else:
                s = v + c
                if s:
                    r[k] = _clean(s)
                else:
                    del r[k]
        return Poly._raw(self.variables, r)

    __radd__ = __add__

    def __neg__(self):
        return Poly._raw(self.variables, {k: -c for k, c in self._t.items()})

    def __sub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o + (-self)

    def __mul__(self, other):
        if _is_scalar(other):
            return self.scale(other)
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        a, b = self._t, o._t
        if len(a) < len(b):
            a, b = b, a
        r: dict = {}
        get = r.get
        for kb, cb in b.items():
            for ka, ca in a.items():
                k = ka + kb
                r[k] = get(k, 0) + ca * cb
        return Poly._raw(self.variables, {k: _clean(c) for k, c in r.items() if c})

    __rmul__ = __mul__

    def scale(self, c) -> "Poly":
        c = as_rational(c)
        if not c:
            return Poly._raw(self.variables, {})
        return Poly._raw(self.variables, {k: _clean(v * c) for k, v in self._t.items()})

    def __truediv__(self, other):
        if _is_scalar(other):
            if not other:
                raise ZeroDivisionError("division of polynomial by zero")
            return self.scale(Fraction(1) / other)
        return NotImplemented

    def __pow__(self, n: int):
        if not isinstance(n, int) or n < 0:
            raise UsageError("polynomial powers must be non-negative integers")
        result = Poly.const(self.variables, 1)
        base = self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    def __eq__(self, other):
        if isinstance(other, Poly):
            return self.variables == other.variables and self._t == other._t
        if _is_scalar(other):
            return self.is_constant() and self.constant_value() == other
        return NotImplemented

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.variables, frozenset(self._t.items())))
        return self._hash

    # -- calculus and evaluation

    def diff(self, name: str) -> "Poly":
        i = self._index(name)
        shift = _BITS * i
        unit = 1 << shift
        r = {}
        for k, c in self._t.items():
            e = (k >> shift) & _MASK
            if e:
                r[k - unit] = c * e
        return Poly._raw(self.variables, r)

    def evaluate(self, point: Mapping[str, object]):
        """Exact value at a full binding of the variables."""
        missing = [v for v in self.variables if v not in point]
        if missing:
            raise UsageError(f"missing bindings for {missing}")
        vals = [as_rational(point[v]) if not isinstance(point[v], float) else point[v]
                for v in self.variables]
        return self._eval_list(vals)

    def _eval_list(self, vals: Sequence) -> object:
        n = len(vals)
        powers: list[dict[int, object]] = [dict() for _ in range(n)]
        total = 0
        for k, c in self._t.items():
            term = c
            for i in range(n):
                e = (k >> (_BITS * i)) & _MASK
                if e:
                    cache = powers[i]
                    p = cache.get(e)
                    if p is None:
                        p = vals[i] ** e
                        cache[e] = p
                    term = term * p
            total = total + term
        return _clean(total) if not isinstance(total, float) else total

    def partial_eval(self, point: Mapping[str, object]) -> "Poly":
        """Substitute values for some variables; result lives on the remaining ones."""
        for name in point:
            self._index(name)
        n = len(self.variables)
        keep = [i for i, v in enumerate(self.variables) if v not in point]
        vals = {i: as_rational(point[v]) for i, v in enumerate(self.variables) if v in point}
        newvars = tuple(self.variables[i] for i in keep)
        r: dict = {}
        for k, c in self._t.items():
            e = _unpack(k, n)
            for i, val in vals.items():
                if e[i]:
                    c = c * val ** e[i]
            if not c:
                continue
            nk = _pack([e[i] for i in keep])
            r[nk] = r.get(nk, 0) + c
        return Poly._raw(newvars, {k: _clean(c) for k, c in r.items() if c})

    def substitute(self, images: Mapping[str, "Poly"], target_vars: Sequence[str]) -> "Poly":
        """Replace every variable by a polynomial over ``target_vars``."""
        target_vars = tuple(target_vars)
        imgs = []
        for v in self.variables:
            if v not in images:
                raise UsageError(f"no image for variable {v!r}")
            im = images[v]
            if _is_scalar(im):
                im = Poly.const(target_vars, im)
            if im.variables != target_vars:
                raise UsageError("images must share the target variable list")
            imgs.append(im)
        n = len(self.variables)
        cache: list[dict[int, Poly]] = [dict() for _ in range(n)]
        total = Poly.zero(target_vars)
        for k, c in self._t.items():
            term = Poly.const(target_vars, c)
            for i in range(n):
                e = (k >> (_BITS * i)) & _MASK
                if e:
                    p = cache[i].get(e)
                    if p is None:
                        p = imgs[i] ** e
                        cache[i][e] = p
                    term = term * p
            total = total + term
        return total

    def embed(self, variables: Sequence[str]) -> "Poly":
        """Re-express over a variable list that contains the current one."""
        variables = tuple(variables)
        if variables == self.variables:
            return self
        try:
            pos = [variables.index(v) for v in self.variables]
        except ValueError:
            raise UsageError("target variable list must contain the source variables") from None
        n = len(self.variables)
        r = {}
        for k, c in self._t.items():
            e = _unpack(k, n)
            nk = 0
            for i, ei in enumerate(e):
                nk |= ei << (_BITS * pos[i])
            r[nk] = c
        return Poly._raw(variables, r)

    def coefficients(self, over: Sequence[str]) -> dict[tuple[int, ...], "Poly"]:
        """Collect by monomials in ``over``; values are polys in the other variables."""
        over = tuple(over)
        idx = [self._index(v) for v in over]
        rest = [i for i in range(len(self.variables)) if i not in idx]
        restvars = tuple(self.variables[i] for i in rest)
        n = len(self.variables)
        out: dict[tuple[int, ...], dict] = {}
        for k, c in self._t.items():
            e = _unpack(k, n)
            mono = tuple(e[i] for i in idx)
            rk = 0
            for j, i in enumerate(rest):
                rk |= e[i] << (_BITS * j)
            out.setdefault(mono, {})[rk] = c
        return {m: Poly._raw(restvars, t) for m, t in out.items()}

    # -- text and JSON

    def __str__(self) -> str:
        if not self._t:
            return "0"
        parts = []
        for exps, c in self.sorted_terms():
            mono = "*".join(
                v if e == 1 else f"{v}^{e}" for v, e in zip(self.variables, exps) if e)
            q = Fraction(c)
            mag = abs(q)
            sign = "-" if q < 0 else "+"
            if mono:
                body = mono if mag == 1 else f"{format_rational(mag)}*{mono}"
            else:
                body = format_rational(mag)
            parts.append((sign, body))
        first_sign, first = parts[0]
        out = ("-" if first_sign == "-" else "") + first
        for sign, body in parts[1:]:
            out += f" {sign} {body}"
        return out

    def __repr__(self) -> str:
        return f"Poly({str(self)!r}, vars={self.variables})"

    def to_json(self) -> list[dict]:
        return [{"exps": list(e), "coef": format_rational(c)} for e, c in self.sorted_terms()]

    @classmethod
    def from_json(cls, variables: Iterable[str], data: list[dict]) -> "Poly":
        return cls(variables, {tuple(t["exps"]): as_rational(t["coef"]) for t in data})


def poly_arith(a: Poly, b: Poly, op: str) -> Poly:
    if not isinstance(a, Poly) or not isinstance(b, Poly):
        raise UsageError("poly_arith expects two polynomials")
    if a.variables != b.variables:
        raise UsageError("mismatched variable lists")
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    raise UsageError(f"unknown operation {op!r}")


def poly_diff(p: Poly, var: str) -> Poly:
    return p.diff(var)


def poly_eval(p: Poly, point: Mapping[str, object]):
    return p.evaluate(point)


# ------------------------------------------------------------- division, gcd

def divexact(p: Poly, q: Poly) -> Poly:
    """Exact quotient p/q; raises ArithmeticError when q does not divide p."""
    quotient, remainder = _divmod(p, q)
    if remainder:
        raise ArithmeticError("polynomial division is not exact")
    return quotient


def divides(q: Poly, p: Poly) -> bool:
    return not _divmod(p, q)[1]


def _divmod(p: Poly, q: Poly) -> tuple[Poly, Poly]:
    # Stops at the first leading term that is not divisible: the remainder is
    # nonzero exactly when q does not divide p.
    if q.is_zero():
        raise ZeroDivisionError("division by the zero polynomial")
    if p.variables != q.variables:
        raise UsageError("mismatched variable lists")
    n = len(p.variables)
    qk = max(q._t, key=lambda k: _order_key(k, n))
    qe = _unpack(qk, n)
    qc = q._t[qk]
    inv = Fraction(1) / qc if qc not in (1, -1) else qc
    r = dict(p._t)
    out: dict = {}
    while r:
        rk = max(r, key=lambda k: _order_key(k, n))
        re_ = _unpack(rk, n)
        if any(a < b for a, b in zip(re_, qe)):
            return Poly._raw(p.variables, out), Poly._raw(p.variables, r)
        mk = rk - qk
        mc = _clean(r[rk] * inv)
        out[mk] = mc
        for k, c in q._t.items():
            nk = k + mk
            v = r.get(nk, 0) - mc * c
            if v:
                r[nk] = _clean(v)
            else:
                r.pop(nk, None)
    return Poly._raw(p.variables, out), Poly._raw(p.variables, {})


def _monic(p: Poly) -> Poly:
    if p.is_zero():
        return p
    lc = p.leading_coefficient()
    return p if lc == 1 else p.scale(Fraction(1) / lc)


def _split(p: Poly, i: int) -> dict[int, Poly]:
    shift = _BITS * i
    out: dict[int, dict] = {}
    for k, c in p._t.items():
        e = (k >> shift) & _MASK
        out.setdefault(e, {})[k - (e << shift)] = c
    return {e: Poly._raw(p.variables, t) for e, t in out.items()}


def _join(coeffs: Mapping[int, Poly], i: int, variables: tuple) -> Poly:
    shift = _BITS * i
    t = {}
    for e, c in coeffs.items():
        for k, v in c._t.items():
            t[k + (e << shift)] = v
    return Poly._raw(variables, t)


def _content(coeffs: Iterable[Poly]) -> Poly:
    g = None
    for c in coeffs:
        g = c if g is None else poly_gcd(g, c)
        if g.is_constant():
            return Poly.const(g.variables, 1)
    return g


def _primitive(coeffs: dict[int, Poly]) -> dict[int, Poly]:
    cont = _content(coeffs.values())
    if not cont.is_constant():
        coeffs = {e: divexact(c, cont) for e, c in coeffs.items()}
    top = coeffs[max(coeffs)]
    lc = top.leading_coefficient()
    if lc != 1:
        s = Fraction(1) / lc
        coeffs = {e: c.scale(s) for e, c in coeffs.items()}
    return coeffs


def _prem(a: dict[int, Poly], b: dict[int, Poly], i: int, variables: tuple) -> dict[int, Poly]:
    db = max(b)
    lcb = b[db]
    r = dict(a)
    while r and max(r) >= db:
        dr = max(r)
        lcr = r[dr]
        shift = dr - db
        nr = {e: c * lcb for e, c in r.items()}
        for e, c in b.items():
            key = e + shift
            v = nr.get(key, Poly.zero(variables)) - lcr * c
            if v:
                nr[key] = v
            else:
                nr.pop(key, None)
        r = nr
    return r


def poly_gcd(a: Poly, b: Poly) -> Poly:
    """Greatest common divisor, normalized monic in the term order.

    Recursive primitive polynomial remainder sequences: the largest-index
    variable in use is the main variable, coefficients are handled by recursion.
    """
    if a.variables != b.variables:
        raise UsageError("mismatched variable lists")
    variables = a.variables
    if a.is_zero():
        return _monic(b)
    if b.is_zero():
        return _monic(a)
    if a.is_constant() or b.is_constant():
        return Poly.const(variables, 1)
    used_a = set(a.used_variables())
    used_b = set(b.used_variables())
    i = max(variables.index(v) for v in used_a | used_b)
    v = variables[i]
    if v not in used_b:
        return poly_gcd(_content(_split(a, i).values()), b)
    if v not in used_a:
        return poly_gcd(a, _content(_split(b, i).values()))
    A = _split(a, i)
    B = _split(b, i)
    c = poly_gcd(_content(A.values()), _content(B.values()))
    A = _primitive(A)
    B = _primitive(B)
    if max(A) < max(B):
        A, B = B, A
    while True:
        R = _prem(A, B, i, variables)
        if not R:
            g = _join(B, i, variables)
            break
        if max(R) == 0:
            g = Poly.const(variables, 1)
            break
        A, B = B, _primitive(R)
    return _monic(c * g)


# ---------------------------------------------------------- rational functions

class RatFun:
    """Reduced quotient num/den with monic denominator."""

    __slots__ = ("num", "den")

    def __init__(self, num: Poly, den: Poly | None = None, *, reduce: bool = True):
        if den is None:
            den = Poly.const(num.variables, 1)
        if num.variables != den.variables:
            raise UsageError("numerator and denominator variable lists differ")
        if den.is_zero():
            raise ZeroDivisionError("zero polynomial denominator")
        if num.is_zero():
            den = Poly.const(num.variables, 1)
        elif reduce and not den.is_constant() and not num.is_constant():
            g = poly_gcd(num, den)
            if not g.is_constant():
                num = divexact(num, g)
                den = divexact(den, g)
        lc = den.leading_coefficient()
        if lc != 1:
            s = Fraction(1) / lc
            num = num.scale(s)
            den = den.scale(s)
        self.num = num
        self.den = den

    @property
    def variables(self) -> tuple[str, ...]:
        return self.num.variables

    @classmethod
    def const(cls, variables, c) -> "RatFun":
        return cls(Poly.const(variables, c))

    def is_polynomial(self) -> bool:
        return self.den.is_constant()

    def is_zero(self) -> bool:
        return self.num.is_zero()

    def _coerce(self, other) -> "RatFun | None":
        if isinstance(other, RatFun):
            if other.variables != self.variables:
                raise UsageError("mismatched variable lists")
            return other
        if isinstance(other, Poly):
            return RatFun(other)
        if _is_scalar(other):
            return RatFun.const(self.variables, other)
        return None

    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        if self.den == o.den:
            return RatFun(self.num + o.num, self.den)
        g = poly_gcd(self.den, o.den)
        if g.is_constant():
            return RatFun(self.num * o.den + o.num * self.den, self.den * o.den)
        d1 = divexact(self.den, g)
        d2 = divexact(o.den, g)
        return RatFun(self.num * d2 + o.num * d1, d1 * o.den)

    __radd__ = __add__

    def __neg__(self):
        return RatFun(-self.num, self.den, reduce=False)

    def __sub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o + (-self)

    def __mul__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return RatFun(self.num * o.num, self.den * o.den)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        if o.is_zero():
            raise ZeroDivisionError("division by the zero rational function")
        return RatFun(self.num * o.den, self.den * o.num)

    def __rtruediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o / self

    def __pow__(self, n: int):
        if not isinstance(n, int):
            raise UsageError("rational function powers must be integers")
        if n < 0:
            if self.is_zero():
                raise ZeroDivisionError("negative power of zero")
            return RatFun(self.den ** (-n), self.num ** (-n), reduce=False)
        return RatFun(self.num ** n, self.den ** n, reduce=False)

    def diff(self, name: str) -> "RatFun":
        n, d = self.num, self.den
        return RatFun(n.diff(name) * d - n * d.diff(name), d * d)

    def evaluate(self, point: Mapping[str, object]):
        d = self.den.evaluate(point)
        if not d:
            raise ZeroDivisionError("denominator vanishes at the given point")
        return _clean(Fraction(self.num.evaluate(point)) / d)

    def __eq__(self, other):
        if isinstance(other, RatFun):
            return self.num == other.num and self.den == other.den
        if isinstance(other, Poly) or _is_scalar(other):
            return self.is_polynomial() and self.den == 1 and self.num == other
        return NotImplemented

    def __hash__(self):
        return hash((self.num, self.den))

    def __str__(self) -> str:
        if self.den == 1:
            return str(self.num)
        return f"({self.num})/({self.den})"

    def __repr__(self) -> str:
        return f"RatFun({str(self)!r})"

    def to_json(self) -> dict:
        return {"variables": list(self.variables), "num": self.num.to_json(),
                "den": self.den.to_json()}

    @classmethod
    def from_json(cls, data: dict) -> "RatFun":
        vs = data["variables"]
        return cls(Poly.from_json(vs, data["num"]), Poly.from_json(vs, data["den"]))


# ------------------------------------------------------------ linear algebra

def _row_key(row: Sequence) -> tuple | None:
    """Integer-primitive representative of a row, sign fixed; None for zero rows."""
    den = 1
    for v in row:
        if type(v) is Fraction:
            d = v.denominator
            den = den * d // _igcd(den, d)
    ints = [int(v * den) for v in row]
    g = 0
    for v in ints:
        g = _igcd(g, v)
    if g == 0:
        return None
    first = next(v for v in ints if v)
    if first < 0:
        g = -g
    return tuple(v // g for v in ints)


def rref(rows: Sequence[Sequence], ncols: int | None = None) -> tuple[list[list], list[int]]:
    """Reduced row echelon form over the rationals; returns (nonzero rows, pivot columns).

    Rows are first reduced to primitive integer representatives and
    deduplicated, which keeps tall coefficient systems cheap.
    """
    if ncols is None:
        ncols = len(rows[0]) if rows else 0
    uniq = []
    seen = set()
    for row in rows:
        if len(row) != ncols:
            raise UsageError("ragged matrix")
        k = _row_key(row)
        if k is not None and k not in seen:
            seen.add(k)
            uniq.append([Fraction(v) for v in k])
    # process sparse, short rows first: mostly a cost heuristic
    uniq.sort(key=lambda r: (sum(1 for v in r if v), [abs(v) for v in r]))
    pivots: list[int] = []
    basis: list[list] = []
    for row in uniq:
        for prow, pc in zip(basis, pivots):
            f = row[pc]
            if f:
                row = [a - f * b for a, b in zip(row, prow)]
        pc = next((j for j, v in enumerate(row) if v), None)
        if pc is None:
            continue
        inv = 1 / row[pc]
        row = [v * inv for v in row]
        for bi, prow in enumerate(basis):
            f = prow[pc]
            if f:
                basis[bi] = [a - f * b for a, b in zip(prow, row)]
        basis.append(row)
        pivots.append(pc)
        if len(pivots) == ncols:
            break
    order = sorted(range(len(pivots)), key=lambda i: pivots[i])
    return ([[_clean(v) for v in basis[i]] for i in order], [pivots[i] for i in order])


def rank(rows: Sequence[Sequence], ncols: int | None = None) -> int:
    return len(rref(rows, ncols)[1])


def nullspace(M, ncols: int | None = None) -> list[list]:
    """Basis of ker(M): one vector per free column, with 1 in that column."""
    if isinstance(M, RatMatrix):
        rows, ncols = M.entries, M.cols
    else:
        rows = M
        if ncols is None:
            ncols = len(rows[0]) if rows else 0
    red, pivots = rref(rows, ncols)
    pivset = set(pivots)
    basis = []
    for free in range(ncols):
        if free in pivset:
            continue
        v = [0] * ncols
        v[free] = 1
        for row, pc in zip(red, pivots):
            if row[free]:
                v[pc] = _clean(-row[free])
        basis.append(v)
    return basis


class RatMatrix:
    """Dense exact matrix."""

    __slots__ = ("rows", "cols", "entries")

    def __init__(self, entries: Sequence[Sequence], cols: int | None = None):
        entries = tuple(tuple(as_rational(v) for v in row) for row in entries)
        if cols is None:
            if not entries:
                raise UsageError("column count required for an empty matrix")
            cols = len(entries[0])
        if any(len(r) != cols for r in entries):
            raise UsageError("ragged matrix")
        self.rows = len(entries)
        self.cols = cols
        self.entries = entries

    @classmethod
    def identity(cls, n: int) -> "RatMatrix":
        return cls([[int(i == j) for j in range(n)] for i in range(n)])

    def rank(self) -> int:
        return rank(self.entries, self.cols)

    def rref(self) -> tuple[list[list], list[int]]:
        return rref(self.entries, self.cols)

    def nullspace(self) -> list[list]:
        return nullspace(self)

    def apply(self, v: Sequence) -> list:
        if len(v) != self.cols:
            raise UsageError("dimension mismatch")
        return [_clean(sum((a * b for a, b in zip(row, v)), Fraction(0))) for row in self.entries]

    def __eq__(self, other):
        return isinstance(other, RatMatrix) and self.entries == other.entries and self.cols == other.cols

    def __hash__(self):
        return hash((self.entries, self.cols))


# ------------------------------------------------------- small 3x3 helpers

def mat_mul(a, b):
    n, m, p = len(a), len(b), len(b[0])
    return [[_clean(sum((a[i][k] * b[k][j] for k in range(m)), 0)) for j in range(p)]
            for i in range(n)]


def transpose(a):
    return [list(r) for r in zip(*a)]


def det3(m) -> object:
    return _clean(
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]))


def inv3(m):
    d = det3(m)
    if not d:
        raise ZeroDivisionError("singular matrix")
    d = Fraction(d) if not isinstance(d, float) else d
    cof = [[m[(j + 1) % 3][(i + 1) % 3] * m[(j + 2) % 3][(i + 2) % 3]
            - m[(j + 1) % 3][(i + 2) % 3] * m[(j + 2) % 3][(i + 1) % 3]
            for j in range(3)] for i in range(3)]
    return [[_clean(c / d) if not isinstance(c / d, float) else c / d for c in row] for row in cof]
