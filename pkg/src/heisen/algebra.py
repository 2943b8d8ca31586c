"""Exact normal ordering in the enveloping algebra of the Heisenberg Lie algebra.

Relations: [X_i, Y_j] = -δ_ij S, S central.  Elements are kept in PBW normal
form with the order X_1..X_d < Y_1..Y_d < S, so a monomial is just an
exponent vector (a_1..a_d, b_1..b_d, c) meaning X^a Y^b S^c.

Expression grammar (the ``algebra`` CLI command)::

    expr   := term (("+" | "-") term)*
    term   := ["-"] factor ("*" factor)*
    factor := atom ["^" INT]
    atom   := INT ["/" INT] | "X"INT | "Y"INT | "S" | "Delta"
            | "(" expr ")" | "[" expr "," expr "]"

``[a, b]`` is the commutator ab - ba and ``Delta`` is Σ (X_i^2 + Y_i^2).
"""
from __future__ import annotations

import itertools
import re
from fractions import Fraction
from functools import lru_cache
from math import comb, factorial


class AlgebraElement:
    __slots__ = ("d", "terms")

    def __init__(self, d, terms=None):
        if d < 1:
            raise ValueError("d must be >= 1")
        self.d = d
        self.terms = {}
        for mono, c in (terms or {}).items():
            c = Fraction(c)
            if c != 0:
                if len(mono) != 2 * d + 1:
                    raise ValueError("monomial length does not match d")
                self.terms[tuple(mono)] = c

    # constructors
    @classmethod
    def scalar(cls, c, d):
        return cls(d, {(0,) * (2 * d + 1): c})

    @classmethod
    def gen(cls, i, d):
        if not 1 <= i <= 2 * d + 1:
            raise ValueError(f"generator id {i} out of range for d={d}")
        mono = [0] * (2 * d + 1)
        mono[i - 1] = 1
        return cls(d, {tuple(mono): 1})

    @classmethod
    def X(cls, i, d):
        return cls.gen(i, d)

    @classmethod
    def Y(cls, i, d):
        return cls.gen(d + i, d)

    @classmethod
    def S(cls, d):
        return cls.gen(2 * d + 1, d)

    @classmethod
    def delta(cls, d):
        out = cls(d)
        for i in range(1, 2 * d + 1):
            g = cls.gen(i, d)
            out = out + g * g
        return out

    @classmethod
    def word(cls, ids, d):
        out = cls.scalar(1, d)
        for i in ids:
            out = out * cls.gen(i, d)
        return out

    # arithmetic
    def _check(self, other):
        if not isinstance(other, AlgebraElement):
            other = AlgebraElement.scalar(other, self.d)
        if other.d != self.d:
            raise ValueError("elements have different d")
        return other

    def __add__(self, other):
        other = self._check(other)
        out = dict(self.terms)
        for m, c in other.terms.items():
            out[m] = out.get(m, 0) + c
        return AlgebraElement(self.d, out)

    __radd__ = __add__

    def __neg__(self):
        return AlgebraElement(self.d, {m: -c for m, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-self._check(other))

    def __rsub__(self, other):
        return self._check(other) - self

    def __mul__(self, other):
        if not isinstance(other, AlgebraElement):
            c = Fraction(other)
            return AlgebraElement(self.d, {m: c * v for m, v in self.terms.items()})
        return multiply(self, other)

    def __rmul__(self, other):
        c = Fraction(other)
        return AlgebraElement(self.d, {m: c * v for m, v in self.terms.items()})

    def __pow__(self, n):
        if n < 0:
            raise ValueError("negative power")
        out = AlgebraElement.scalar(1, self.d)
        for _ in range(n):
            out = out * self
        return out

    def __eq__(self, other):
        if not isinstance(other, AlgebraElement):
            other = AlgebraElement.scalar(other, self.d)
        return self.d == other.d and self.terms == other.terms

    def __hash__(self):
        return hash((self.d, frozenset(self.terms.items())))

    def is_zero(self):
        return not self.terms

    def coefficient(self, mono):
        return self.terms.get(tuple(mono), Fraction(0))

    def __repr__(self):
        return f"AlgebraElement({format_element(self)})"

    def __str__(self):
        return format_element(self)


@lru_cache(maxsize=None)
def _mono_mul(m1, m2, d):
    """Normal-ordered product of two PBW monomials, as ((mono, coeff), ...).

    Only Y_i^b (left) meeting X_i^a (right) needs reordering, and with the
    central commutator [Y_i, X_i] = S one has
    Y^b X^a = Σ_k k! C(a,k) C(b,k) X^(a-k) Y^(b-k) S^k.
    """
    # expansions for each index i: list of (k, coeff)
    parts = []
    for i in range(d):
        b = m1[d + i]
        a = m2[i]
        parts.append([(k, factorial(k) * comb(a, k) * comb(b, k)) for k in range(min(a, b) + 1)])
    out = {}
    for choice in itertools.product(*parts):
        mono = [0] * (2 * d + 1)
        coeff = 1
        ks = 0
        for i, (k, c) in enumerate(choice):
            mono[i] = m1[i] + m2[i] - k
            mono[d + i] = m1[d + i] + m2[d + i] - k
            coeff *= c
            ks += k
        mono[2 * d] = m1[2 * d] + m2[2 * d] + ks
        key = tuple(mono)
        out[key] = out.get(key, 0) + coeff
    return tuple(out.items())


def multiply(a: AlgebraElement, b: AlgebraElement) -> AlgebraElement:
    if a.d != b.d:
        raise ValueError("elements have different d")
    out = {}
    for m1, c1 in a.terms.items():
        for m2, c2 in b.terms.items():
            for m, c in _mono_mul(m1, m2, a.d):
                out[m] = out.get(m, 0) + c1 * c2 * c
    return AlgebraElement(a.d, out)


def commutator(a, b):
    return a * b - b * a


def normal_order_word(ids, d) -> AlgebraElement:
    """Normal-order a word by the explicit rewrite Y_j X_i -> X_i Y_j + δ_ij S.

    Independent of the closed-form product above; used to cross-check it.
    """
    out = {}
    stack = [(tuple(ids), Fraction(1))]
    while stack:
        w, c = stack.pop()
        for k in range(len(w) - 1):
            if w[k] > w[k + 1]:
                left, right = w[k], w[k + 1]
                swapped = w[:k] + (right, left) + w[k + 2:]
                stack.append((swapped, c))
                if left > d and left <= 2 * d and right == left - d:
                    stack.append((w[:k] + (2 * d + 1,) + w[k + 2:], c))
                break
        else:
            mono = [0] * (2 * d + 1)
            for i in w:
                mono[i - 1] += 1
            key = tuple(mono)
            out[key] = out.get(key, 0) + c
    return AlgebraElement(d, out)


def _mono_str(m, d):
    parts = []
    for idx, e in enumerate(m):
        if e == 0:
            continue
        if idx < d:
            name = f"X{idx + 1}"
        elif idx < 2 * d:
            name = f"Y{idx - d + 1}"
        else:
            name = "S"
        parts.append(name if e == 1 else f"{name}^{e}")
    return "*".join(parts)


def _mono_key(m, d):
    deg = sum(m[:2 * d]) + 2 * m[2 * d]
    return (deg, tuple(-e for e in m))


def format_element(a: AlgebraElement) -> str:
    if not a.terms:
        return "0"
    pieces = []
    for m in sorted(a.terms, key=lambda m: _mono_key(m, a.d)):
        c = a.terms[m]
        body = _mono_str(m, a.d)
        mag = abs(c)
        if body == "":
            s = str(mag)
        elif mag == 1:
            s = body
        else:
            s = f"{mag}*{body}"
        pieces.append(("-" if c < 0 else "+", s))
    out = ("-" if pieces[0][0] == "-" else "") + pieces[0][1]
    for sign, s in pieces[1:]:
        out += f" {sign} {s}"
    return out


# ---------------------------------------------------------------- parsing

class ParseError(ValueError):
    pass


_TOKEN = re.compile(r"\s*(?:(\d+)|(Delta|X\d+|Y\d+|S)|(.))")


def _tokenize(text):
    toks = []
    pos = 0
    text = text.strip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            break
        num, name, other = m.groups()
        if num is not None:
            toks.append(("num", int(num)))
        elif name is not None:
            toks.append(("name", name))
        elif other.strip():
            if other not in "+-*/^()[],":
                raise ParseError(f"unexpected character {other!r}")
            toks.append(("op", other))
        pos = m.end()
    return toks


def infer_d(text):
    idx = [int(v) for v in re.findall(r"[XY](\d+)", text)]
    return max(idx) if idx else 1


def parse_expression(text, d=None) -> AlgebraElement:
    if d is None:
        d = infer_d(text)
    toks = _tokenize(text)
    pos = 0

    def peek():
        return toks[pos] if pos < len(toks) else (None, None)

    def take(kind=None, val=None):
        nonlocal pos
        t = peek()
        if t[0] is None or (kind and t[0] != kind) or (val is not None and t[1] != val):
            raise ParseError(f"expected {val or kind}, got {t[1]!r}")
        pos += 1
        return t

    def atom():
        kind, val = peek()
        if kind == "num":
            take()
            if peek() == ("op", "/"):
                take()
                den = take("num")[1]
                if den == 0:
                    raise ParseError("division by zero")
                return AlgebraElement.scalar(Fraction(val, den), d)
            return AlgebraElement.scalar(val, d)
        if kind == "name":
            take()
            if val == "Delta":
                return AlgebraElement.delta(d)
            if val == "S":
                return AlgebraElement.S(d)
            i = int(val[1:])
            if not 1 <= i <= d:
                raise ParseError(f"index out of range in {val} for d={d}")
            return AlgebraElement.X(i, d) if val[0] == "X" else AlgebraElement.Y(i, d)
        if (kind, val) == ("op", "("):
            take()
            e = expr()
            take("op", ")")
            return e
        if (kind, val) == ("op", "["):
            take()
            a = expr()
            take("op", ",")
            b = expr()
            take("op", "]")
            return commutator(a, b)
        raise ParseError(f"unexpected token {val!r}")

    def factor():
        a = atom()
        if peek() == ("op", "^"):
            take()
            a = a ** take("num")[1]
        return a

    def term():
        neg = False
        if peek() == ("op", "-"):
            take()
            neg = True
        a = factor()
        while peek() == ("op", "*"):
            take()
            a = a * factor()
        return -a if neg else a

    def expr():
        a = term()
        while peek() in (("op", "+"), ("op", "-")):
            op = take()[1]
            b = term()
            a = a + b if op == "+" else a - b
        return a

    if not toks:
        raise ParseError("empty expression")
    out = expr()
    if pos != len(toks):
        raise ParseError(f"trailing input at token {toks[pos][1]!r}")
    return out


# ------------------------------------------------------ operator identities

def partner(i, d):
    """J acting on E = (X, Y): X_i -> Y_i, Y_i -> -X_i.  Returns (sign, id)."""
    if i <= d:
        return 1, d + i
    return -1, i - d


def delta_commutator_check(d):
    """Δ E_j - E_j Δ == 2 (J E)_j S for every horizontal generator."""
    D = AlgebraElement.delta(d)
    S = AlgebraElement.S(d)
    ok = True
    for i in range(1, 2 * d + 1):
        E = AlgebraElement.gen(i, d)
        sgn, j = partner(i, d)
        ok &= commutator(D, E) == 2 * sgn * AlgebraElement.gen(j, d) * S
    return ok


def _j_power(i, k, d):
    """(J^k E)_i as (sign, id)."""
    sgn = 1
    for _ in range(k):
        s, i = partner(i, d)
        sgn *= s
    return sgn, i


def delta_power_identities(n, d):
    """Δ^n E = Σ_k C(n,k)(2J)^k E Δ^{n-k} S^k and the mirrored E Δ^n form."""
    D = AlgebraElement.delta(d)
    S = AlgebraElement.S(d)
    ok = True
    for i in range(1, 2 * d + 1):
        E = AlgebraElement.gen(i, d)
        rhs1 = AlgebraElement(d)
        rhs2 = AlgebraElement(d)
        for k in range(n + 1):
            s1, j1 = _j_power(i, k, d)
            g = AlgebraElement.gen(j1, d)
            rhs1 = rhs1 + comb(n, k) * 2 ** k * s1 * (g * D ** (n - k) * S ** k)
            rhs2 = rhs2 + comb(n, k) * (-2) ** k * s1 * (D ** (n - k) * S ** k * g)
        ok &= (D ** n * E == rhs1) and (E * D ** n == rhs2)
    return ok


def sorted_words(length, d):
    """PBW-sorted words of the given homogeneous length."""
    ids = range(1, 2 * d + 2)
    out = []
    for k in range((length + 1) // 2, length + 1):
        for w in itertools.combinations_with_replacement(ids, k):
            if sum(2 if i == 2 * d + 1 else 1 for i in w) == length:
                out.append(w)
    return out


def _solve_exact(columns, target):
    """Solve Σ x_c column_c = target over Q by sparse incremental elimination.

    Returns the list of x_c (free unknowns set to zero) or None.
    """
    basis = []  # (pivot monomial, reduced vector, combination over columns)

    def reduce(vec, comb_):
        for piv, b, bc in basis:
            f = vec.get(piv)
            if f:
                for m, c in b.items():
                    v = vec.get(m, 0) - f * c
                    if v:
                        vec[m] = v
                    else:
                        vec.pop(m, None)
                for k, c in bc.items():
                    v = comb_.get(k, 0) - f * c
                    if v:
                        comb_[k] = v
                    else:
                        comb_.pop(k, None)
        return vec, comb_

    for idx, col in enumerate(columns):
        vec, cmb = reduce(dict(col.terms), {idx: Fraction(1)})
        if not vec:
            continue
        piv = min(vec)
        pv = vec[piv]
        vec = {m: c / pv for m, c in vec.items()}
        cmb = {k: c / pv for k, c in cmb.items()}
        # keep the basis fully reduced on pivots
        for j, (p2, b2, c2) in enumerate(basis):
            f = b2.get(piv)
            if f:
                for m, c in vec.items():
                    v = b2.get(m, 0) - f * c
                    if v:
                        b2[m] = v
                    else:
                        b2.pop(m, None)
                for k, c in cmb.items():
                    v = c2.get(k, 0) - f * c
                    if v:
                        c2[k] = v
                    else:
                        c2.pop(k, None)
        basis.append((piv, vec, cmb))
    res, _ = reduce(dict(target.terms), {})
    if res:
        return None
    # target = Σ f_b * basis_b, with f_b the target coefficient on each pivot
    x = [Fraction(0)] * len(columns)
    tvec = dict(target.terms)
    coeffs = {}
    remaining = dict(tvec)
    for piv, b, bc in basis:
        f = remaining.get(piv, 0)
        if f:
            coeffs[piv] = f
            for m, c in b.items():
                v = remaining.get(m, 0) - f * c
                if v:
                    remaining[m] = v
                else:
                    remaining.pop(m, None)
            for k, c in bc.items():
                x[k] += f * c
    return x


@lru_cache(maxsize=None)
def _tail(a, j, d):
    """(-Δ)^a S^j."""
    return (-AlgebraElement.delta(d)) ** a * AlgebraElement.S(d) ** j


def verify_swap_identities(n, I, d):
    """Expand (-Δ)^n D^I and D^I (-Δ)^n in the forms
        Σ_{|K|=|I|} Σ_j C_{K,j} D^K (-Δ)^{n-j} S^j
        Σ_{|K|=|I|} Σ_j C'_{K,j} (-Δ)^{n-j} S^j D^K
    with K running over PBW-sorted words.  Free constants are set to zero.
    """
    ids = tuple(getattr(I, "ids", I))
    L = sum(2 if i == 2 * d + 1 else 1 for i in ids)
    DI = AlgebraElement.word(ids, d)
    cols_l, cols_r, keys = [], [], []
    for K in sorted_words(L, d):
        DK = AlgebraElement.word(K, d)
        for j in range(n + 1):
            tail = _tail(n - j, j, d)
            cols_l.append(DK * tail)
            cols_r.append(tail * DK)
            keys.append((K, j))
    xl = _solve_exact(cols_l, _tail(n, 0, d) * DI)
    xr = _solve_exact(cols_r, DI * _tail(n, 0, d))
    report = {"n": n, "I": ids, "d": d, "match": xl is not None and xr is not None,
              "C": {}, "C_prime": {}}
    if xl is not None:
        report["C"] = {k: v for k, v in zip(keys, xl) if v != 0}
    if xr is not None:
        report["C_prime"] = {k: v for k, v in zip(keys, xr) if v != 0}
    return report
