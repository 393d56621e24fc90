"""Sparse multivariate polynomials with complex coefficients.

A :class:`Polynomial` is an immutable map from exponent tuples to complex
coefficients over a :class:`VariableList`.  Zero coefficients are never
stored.  Printing sorts terms in graded-lexicographic order so that output
is byte-stable.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator, Mapping, Sequence

import numpy as np


class DimensionError(ValueError):
    """Exponent vector or point length does not match the ring."""


class PolySyntaxError(ValueError):
    """Malformed polynomial text."""

    def __init__(self, msg: str, line: int, col: int):
        super().__init__(f"line {line}, column {col}: {msg}")
        self.line = line
        self.col = col


@dataclass(frozen=True)
class VariableList:
    names: tuple[str, ...]

    def __post_init__(self):
        names = tuple(self.names)
        object.__setattr__(self, "names", names)
        if not names:
            raise ValueError("variable list must be nonempty")
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate variable names in {names}")

    @property
    def n(self) -> int:
        return len(self.names)

    def index(self, name: str) -> int:
        return self.names.index(name)

    def __len__(self):
        return len(self.names)


def grlex_key(exp: Sequence[int]):
    """Sort key placing higher total degree first, then lexicographically larger."""
    return (-sum(exp), tuple(-e for e in exp))


class Polynomial:
    """Sparse polynomial over a :class:`VariableList`.

    Instances are treated as immutable; every operation returns a new object.
    """

    __slots__ = ("_terms", "ring")

    def __init__(self, terms: Mapping[Sequence[int], complex], ring: VariableList):
        n = ring.n
        clean: dict[tuple[int, ...], complex] = {}
        for exp, c in terms.items():
            exp = tuple(int(e) for e in exp)
            if len(exp) != n:
                raise DimensionError(f"exponent {exp} has length {len(exp)}, ring has {n} variables")
            if any(e < 0 for e in exp):
                raise ValueError(f"negative exponent in {exp}")
            c = complex(c)
            if c == 0:
                continue
            c = clean.get(exp, 0) + c
            if c == 0:
                clean.pop(exp, None)
            else:
                clean[exp] = c
        self._terms = clean
        self.ring = ring

    # -- constructors -------------------------------------------------------
    @classmethod
    def zero(cls, ring: VariableList) -> "Polynomial":
        return cls({}, ring)

    @classmethod
    def constant(cls, c: complex, ring: VariableList) -> "Polynomial":
        return cls({(0,) * ring.n: c}, ring)

    @classmethod
    def variable(cls, i: int, ring: VariableList) -> "Polynomial":
        exp = [0] * ring.n
        exp[i] = 1
        return cls({tuple(exp): 1.0}, ring)

    @classmethod
    def monomial(cls, exp: Sequence[int], ring: VariableList, coeff: complex = 1.0) -> "Polynomial":
        return cls({tuple(exp): coeff}, ring)

    # -- inspection ---------------------------------------------------------
    @property
    def terms(self) -> dict[tuple[int, ...], complex]:
        return dict(self._terms)

    def items(self) -> Iterator[tuple[tuple[int, ...], complex]]:
        return iter(self._terms.items())

    def __len__(self):
        return len(self._terms)

    def is_zero(self) -> bool:
        return not self._terms

    @property
    def degree(self) -> int:
        """Total degree; -1 for the zero polynomial."""
        if not self._terms:
            return -1
        return max(sum(e) for e in self._terms)

    def coefficient(self, exp: Sequence[int]) -> complex:
        return self._terms.get(tuple(exp), 0j)

    def sorted_terms(self) -> list[tuple[tuple[int, ...], complex]]:
        return sorted(self._terms.items(), key=lambda kv: grlex_key(kv[0]))

    def coeff_norm(self) -> float:
        return math.sqrt(sum(abs(c) ** 2 for c in self._terms.values()))

    # -- arithmetic ---------------------------------------------------------
    def _coerce(self, other) -> "Polynomial":
        if isinstance(other, Polynomial):
            if other.ring != self.ring:
                raise DimensionError("polynomials live in different rings")
            return other
        if isinstance(other, (int, float, complex, np.number)):
            return Polynomial.constant(complex(other), self.ring)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        terms = dict(self._terms)
        for e, c in other._terms.items():
            terms[e] = terms.get(e, 0) + c
        return Polynomial(terms, self.ring)

    __radd__ = __add__

    def __neg__(self):
        return Polynomial({e: -c for e, c in self._terms.items()}, self.ring)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        terms: dict[tuple[int, ...], complex] = {}
        for e1, c1 in self._terms.items():
            for e2, c2 in other._terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                terms[e] = terms.get(e, 0) + c1 * c2
        return Polynomial(terms, self.ring)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if not isinstance(k, int) or k < 0:
            raise ValueError("only non-negative integer powers are supported")
        result = Polynomial.constant(1.0, self.ring)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def scale(self, c: complex) -> "Polynomial":
        return Polynomial({e: c * v for e, v in self._terms.items()}, self.ring)

    def __eq__(self, other):
        if not isinstance(other, Polynomial):
            return NotImplemented
        return self.ring == other.ring and self._terms == other._terms

    def __hash__(self):
        return hash((self.ring, frozenset(self._terms.items())))

    def almost_equal(self, other: "Polynomial", tol: float = 1e-12) -> bool:
        keys = set(self._terms) | set(other._terms)
        return all(abs(self.coefficient(k) - other.coefficient(k)) <= tol for k in keys)

    def __repr__(self):
        return f"Polynomial({format_polynomial(self)!r})"

    def __str__(self):
        return format_polynomial(self)

    # -- calculus -----------------------------------------------------------
    def differentiate(self, beta: Sequence[int]) -> "Polynomial":
        return differentiate(self, beta)

    def __call__(self, x):
        return evaluate(self, x)

    def embed(self, ring: VariableList) -> "Polynomial":
        """Re-express over a ring whose first variables are this ring's variables."""
        if ring.names[: self.ring.n] != self.ring.names:
            raise DimensionError("target ring does not extend this ring")
        pad = (0,) * (ring.n - self.ring.n)
        return Polynomial({e + pad: c for e, c in self._terms.items()}, ring)


def _check_len(vec: Sequence, ring: VariableList, what: str):
    if len(vec) != ring.n:
        raise DimensionError(f"{what} has length {len(vec)}, ring has {ring.n} variables")


def _falling(e: int, k: int) -> int:
    out = 1
    for j in range(k):
        out *= e - j
    return out


def differentiate(p: Polynomial, beta: Sequence[int]) -> Polynomial:
    """Un-normalized iterated partial derivative d^|beta| p / dx^beta."""
    _check_len(beta, p.ring, "beta")
    beta = tuple(int(b) for b in beta)
    terms = {}
    for exp, c in p.items():
        if any(e < b for e, b in zip(exp, beta)):
            continue
        mult = 1
        for e, b in zip(exp, beta):
            mult *= _falling(e, b)
        terms[tuple(e - b for e, b in zip(exp, beta))] = c * mult
    return Polynomial(terms, p.ring)


def evaluate(p: Polynomial, x: Sequence[complex]) -> complex:
    """Sum over terms of coeff * prod(x_i ** e_i)."""
    _check_len(x, p.ring, "point")
    total = 0j
    for exp, c in p.items():
        term = c
        for xi, e in zip(x, exp):
            if e:
                term *= complex(xi) ** e
        total += term
    return total


def mul_monomial(p: Polynomial, alpha: Sequence[int]) -> Polynomial:
    """Multiply ``p`` by the monomial x^alpha."""
    _check_len(alpha, p.ring, "alpha")
    return Polynomial({tuple(e + a for e, a in zip(exp, alpha)): c for exp, c in p.items()}, p.ring)


@dataclass(frozen=True)
class PolySystem:
    generators: tuple[Polynomial, ...]
    ring: VariableList

    def __post_init__(self):
        gens = tuple(self.generators)
        object.__setattr__(self, "generators", gens)
        for g in gens:
            if g.ring != self.ring:
                raise DimensionError("all generators must share the system ring")

    def __len__(self):
        return len(self.generators)

    def __iter__(self):
        return iter(self.generators)

    def __getitem__(self, i):
        return self.generators[i]

    @property
    def n(self) -> int:
        return self.ring.n

    def degrees(self) -> list[int]:
        return [g.degree for g in self.generators]

    def nonzero(self) -> "PolySystem":
        return PolySystem(tuple(g for g in self.generators if not g.is_zero()), self.ring)

    def evaluate(self, x) -> np.ndarray:
        return np.array([evaluate(g, x) for g in self.generators], dtype=complex)

    def residual(self, x) -> float:
        if not self.generators:
            return 0.0
        return float(np.max(np.abs(self.evaluate(x))))

    def jacobian(self) -> list[list[Polynomial]]:
        n = self.n
        rows = []
        for g in self.generators:
            rows.append([differentiate(g, tuple(int(i == j) for j in range(n))) for i in range(n)])
        return rows

    def embed(self, ring: VariableList) -> "PolySystem":
        return PolySystem(tuple(g.embed(ring) for g in self.generators), ring)

    def __str__(self):
        return format_system(self)


def random_unit_complex(rng: np.random.Generator, size=None):
    return np.exp(2j * np.pi * rng.random(size))


def random_complex(rng: np.random.Generator, size=None):
    """Standard complex Gaussian samples."""
    return (rng.standard_normal(size) + 1j * rng.standard_normal(size)) / math.sqrt(2)


def random_combination(system: PolySystem, m: int, rng: np.random.Generator) -> PolySystem:
    """Square a system to ``m`` equations by random complex linear combinations.

    Generators are sorted by decreasing degree; output ``i`` is generator ``i``
    plus random multiples of every generator beyond the first ``m``.  This keeps
    the total-degree Bezout number equal to the product of the ``m`` largest
    degrees.  When ``m`` exceeds the number of generators, extra outputs are
    further random combinations of all generators.
    """
    if m < 1:
        raise ValueError("m must be at least 1")
    gens = [g for g in system.generators if not g.is_zero()]
    if not gens:
        raise ValueError("cannot combine an empty system")
    gens.sort(key=lambda g: -g.degree)
    N = len(gens)
    out = []
    if m >= N:
        head = [g.scale(random_unit_complex(rng)) for g in gens]
        out.extend(head)
        for _ in range(m - N):
            cs = random_complex(rng, N)
            acc = Polynomial.zero(system.ring)
            for c, g in zip(cs, gens):
                acc = acc + g.scale(c)
            out.append(acc)
        return PolySystem(tuple(out), system.ring)
    lam = random_complex(rng, (m, N - m))
    for i in range(m):
        acc = gens[i]
        for j in range(N - m):
            acc = acc + gens[m + j].scale(lam[i, j])
        out.append(acc)
    return PolySystem(tuple(out), system.ring)


# ---------------------------------------------------------------------------
# compiled evaluation (batched over points)
# ---------------------------------------------------------------------------


class CompiledSystem:
    """Vectorized evaluator for a polynomial system.

    ``values(X)`` and ``values_and_jacobian(X)`` accept an array of shape
    ``(B, n)`` and return arrays of shape ``(B, P)`` and ``(B, P, n)``.

    The monomial support is closed under division by single variables, so
    every partial derivative is a linear combination of known monomials and
    values plus Jacobian come out of one matrix product.
    """

    def __init__(self, system: PolySystem):
        self.system = system
        self.n = n = system.n
        self.P = P = len(system.generators)
        support = set()
        for g in system.generators:
            support.update(e for e, _ in g.items())
        closed = {(0,) * n}
        frontier = list(support)
        while frontier:
            e = frontier.pop()
            if e in closed:
                continue
            closed.add(e)
            for i in range(n):
                if e[i]:
                    frontier.append(e[:i] + (e[i] - 1,) + e[i + 1:])
        monos = sorted(closed, key=lambda e: (sum(e), tuple(-v for v in e)))
        index = {e: k for k, e in enumerate(monos)}
        S = len(monos)
        # build recipe: mono[k] = mono[parent[k]] * x[var[k]], layer by layer
        self._layers = []
        by_deg: dict[int, list[int]] = {}
        for k, e in enumerate(monos[1:], start=1):
            by_deg.setdefault(sum(e), []).append(k)
        for deg in sorted(by_deg):
            ks = by_deg[deg]
            parents, vars_ = [], []
            for k in ks:
                e = monos[k]
                i = next(j for j in range(n) if e[j])
                parents.append(index[e[:i] + (e[i] - 1,) + e[i + 1:]])
                vars_.append(i)
            self._layers.append((np.array(ks), np.array(parents), np.array(vars_)))
        M = np.zeros(((1 + n) * P, S), dtype=complex)
        for p, g in enumerate(system.generators):
            for e, c in g.items():
                M[p, index[e]] += c
                for i in range(n):
                    if e[i]:
                        lower = e[:i] + (e[i] - 1,) + e[i + 1:]
                        M[P + i * P + p, index[lower]] += c * e[i]
        self._M_T = np.ascontiguousarray(M.T)
        self._S = S

    def _monomials(self, X):
        B = X.shape[0]
        mono = np.empty((B, self._S), dtype=complex)
        mono[:, 0] = 1.0
        for ks, parents, vars_ in self._layers:
            mono[:, ks] = mono[:, parents] * X[:, vars_]
        return mono

    def values(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=complex)
        if self.P == 0:
            return np.zeros((X.shape[0], 0), dtype=complex)
        return self._monomials(X) @ self._M_T[:, : self.P]

    def values_and_jacobian(self, X):
        X = np.asarray(X, dtype=complex)
        B = X.shape[0]
        if self.P == 0:
            return np.zeros((B, 0), dtype=complex), np.zeros((B, 0, self.n), dtype=complex)
        out = self._monomials(X) @ self._M_T
        vals = out[:, : self.P]
        jac = out[:, self.P:].reshape(B, self.n, self.P).transpose(0, 2, 1)
        return vals, jac


# ---------------------------------------------------------------------------
# text format
# ---------------------------------------------------------------------------


def _fmt_real(v: float) -> str:
    if v == int(v) and abs(v) < 1e15:
        return str(int(v))
    return repr(float(v))


def format_coefficient(c: complex) -> str:
    """Literal for a coefficient; complex values use the ``(a+b*i)`` form."""
    if c.imag == 0:
        return _fmt_real(c.real)
    if c.real == 0:
        return f"({_fmt_real(c.imag)}*i)"
    sign = "+" if c.imag >= 0 else "-"
    return f"({_fmt_real(c.real)}{sign}{_fmt_real(abs(c.imag))}*i)"


def format_monomial(exp: Sequence[int], names: Sequence[str]) -> str:
    parts = []
    for e, name in zip(exp, names):
        if e == 1:
            parts.append(name)
        elif e > 1:
            parts.append(f"{name}^{e}")
    return "*".join(parts)


def format_polynomial(p: Polynomial) -> str:
    if p.is_zero():
        return "0"
    chunks = []
    for k, (exp, c) in enumerate(p.sorted_terms()):
        mono = format_monomial(exp, p.ring.names)
        neg = c.imag == 0 and c.real < 0
        mag = -c if neg else c
        if mono:
            if mag == 1:
                body = mono
            else:
                body = f"{format_coefficient(mag)}*{mono}"
        else:
            body = format_coefficient(mag)
        if k == 0:
            chunks.append(("-" if neg else "") + body)
        else:
            chunks.append((" - " if neg else " + ") + body)
    return "".join(chunks)


def format_system(system: PolySystem) -> str:
    lines = ["vars: " + " ".join(system.ring.names)]
    lines.extend(format_polynomial(g) for g in system.generators)
    return "\n".join(lines) + "\n"


_TOKEN_RE = re.compile(
    r"\s*(?:(?P<num>\d+\.\d*(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?|\d+(?:[eE][+-]?\d+)?)"
    r"|(?P<name>[A-Za-z_][A-Za-z_0-9]*)|(?P<op>[-+*^/()]))"
)


class _Parser:
    def __init__(self, text: str, ring: VariableList, line: int):
        self.ring = ring
        self.line = line
        self.tokens: list[tuple[str, str, int]] = []
        pos = 0
        text = text.rstrip()
        while pos < len(text):
            m = _TOKEN_RE.match(text, pos)
            if not m or m.end() == pos:
                col = pos + 1
                while col - 1 < len(text) and text[col - 1].isspace():
                    col += 1
                raise PolySyntaxError(f"unexpected character {text[col - 1]!r}", line, col)
            kind = m.lastgroup
            self.tokens.append((kind, m.group(kind), m.start(kind) + 1))
            pos = m.end()
        self.k = 0
        self.end_col = len(text) + 1

    def peek(self):
        return self.tokens[self.k] if self.k < len(self.tokens) else (None, None, self.end_col)

    def take(self):
        tok = self.peek()
        self.k += 1
        return tok

    def error(self, msg):
        raise PolySyntaxError(msg, self.line, self.peek()[2])

    def parse(self) -> Polynomial:
        if not self.tokens:
            self.error("empty polynomial")
        p = self.expr()
        if self.k != len(self.tokens):
            self.error(f"unexpected token {self.peek()[1]!r}")
        return p

    def expr(self):
        kind, val, _ = self.peek()
        sign = 1
        if kind == "op" and val in "+-":
            self.take()
            sign = -1 if val == "-" else 1
        acc = self.term() * sign
        while True:
            kind, val, _ = self.peek()
            if kind == "op" and val in "+-":
                self.take()
                t = self.term()
                acc = acc + t if val == "+" else acc - t
            else:
                return acc

    def term(self):
        acc = self.factor()
        while True:
            kind, val, _ = self.peek()
            if kind == "op" and val == "*":
                self.take()
                acc = acc * self.factor()
            elif kind == "op" and val == "/":
                self.take()
                kind2, val2, _ = self.peek()
                f = self.factor()
                if f.degree > 0:
                    self.error("division only by constants")
                c = f.coefficient((0,) * self.ring.n)
                if c == 0:
                    self.error("division by zero")
                acc = acc.scale(1 / c)
            else:
                return acc

    def factor(self):
        base = self.atom()
        kind, val, _ = self.peek()
        if kind == "op" and val == "^":
            self.take()
            kind, val, col = self.take()
            if kind != "num" or not val.isdigit():
                raise PolySyntaxError("exponent must be a non-negative integer", self.line, col)
            base = base ** int(val)
        return base

    def atom(self):
        kind, val, col = self.take()
        if kind == "num":
            c = float(Fraction(val)) if ("." in val or "e" in val.lower()) else int(val)
            return Polynomial.constant(c, self.ring)
        if kind == "name":
            if val in self.ring.names:
                return Polynomial.variable(self.ring.index(val), self.ring)
            if val in ("i", "I"):
                return Polynomial.constant(1j, self.ring)
            raise PolySyntaxError(f"unknown variable {val!r}", self.line, col)
        if kind == "op" and val == "(":
            inner = self.expr()
            kind, val, col2 = self.take()
            if val != ")":
                raise PolySyntaxError("expected ')'", self.line, col2)
            return inner
        if kind == "op" and val == "-":
            return -self.factor()
        if kind is None:
            raise PolySyntaxError("unexpected end of input", self.line, col)
        raise PolySyntaxError(f"unexpected token {val!r}", self.line, col)


_VAR_TOKEN = re.compile(r"[A-Za-z_][A-Za-z_0-9]*")


def parse_polynomial(text: str, ring: VariableList, line: int = 1) -> Polynomial:
    return _Parser(text, ring, line).parse()


def _infer_ring(lines: Iterable[str]) -> VariableList:
    seen: list[str] = []
    for text in lines:
        for name in _VAR_TOKEN.findall(text):
            if name in ("i", "I") or name[0] in "eE" and name[1:].isdigit():
                continue
            if name not in seen:
                seen.append(name)
    if not seen:
        raise ValueError("no variables found; add a 'vars:' header")
    return VariableList(tuple(sorted(seen, key=_natural_key)))


def _natural_key(name: str):
    return [int(tok) if tok.isdigit() else tok for tok in re.split(r"(\d+)", name)]


def parse(text: str, ring: VariableList | None = None) -> PolySystem:
    """Parse a system: an optional ``vars:`` header then one polynomial per line.

    Blank lines and ``#`` comments are skipped.  Without a header (and without
    an explicit ``ring``), variables are collected from the text and sorted
    naturally (x2 before x10).
    """
    body: list[tuple[int, str]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0]
        if not line.strip():
            continue
        stripped = line.strip()
        if stripped.startswith("vars:"):
            if body:
                raise PolySyntaxError("'vars:' header must come first", lineno, 1)
            names = stripped[len("vars:"):].split()
            ring = VariableList(tuple(names))
            continue
        body.append((lineno, line))
    if ring is None:
        ring = _infer_ring(line for _, line in body)
    gens = tuple(parse_polynomial(line, ring, lineno) for lineno, line in body)
    return PolySystem(gens, ring)


def to_text(system: PolySystem) -> str:
    return format_system(system)
