"""Complex-valued functions on (0, inf) and the g-spec mini-language.

Functions are evaluated through ``log_eval(lx)``, the complex logarithm of
the value at x = exp(lx).  Working with logarithms keeps products such as
``pow:2 * expneg`` finite at arguments where one factor overflows and the
other underflows.

Grammar::

    expr   := term ('+' term)*
    term   := factor ('*' factor)*
    factor := '(' expr ')' | atom
    atom   := NAME [':' ARG] | NUMBER

Builtin names: ``h`` (1/(1+x)), ``h2`` (1/(1+x^2)), ``expneg`` (e^-x),
``invlog2sq`` (1/ln^2(2+x)), ``pow:<p>`` (x^p), ``log`` (ln x), ``one``,
``zero``, ``r1:<alpha>``/``r2:<alpha>``/``r3:<alpha>`` (resolvent
profiles, alpha as "re" or "re,im") and ``table:<path.csv>``.
"""

from __future__ import annotations

import csv
import math
import re
from pathlib import Path

import numpy as np

from .errors import ParseError, TableError
from .kernels import _check_alpha, log_profile

LN2 = math.log(2.0)


def parse_complex(text: str) -> complex:
    """Parse "re" or "re,im"."""
    parts = [p.strip() for p in str(text).split(",")]
    try:
        if len(parts) == 1:
            return complex(float(parts[0]), 0.0)
        if len(parts) == 2:
            return complex(float(parts[0]), float(parts[1]))
    except ValueError:
        pass
    raise ValueError(f"cannot parse complex number {text!r}; use 're' or 're,im'")


def _logsumexp(logs):
    logs = [np.asarray(v, dtype=complex) for v in logs]
    shape = np.broadcast_shapes(*(v.shape for v in logs))
    logs = [np.broadcast_to(v, shape) for v in logs]
    m = np.max(np.stack([v.real for v in logs]), axis=0)
    fin = np.isfinite(m)
    msafe = np.where(fin, m, 0.0)
    acc = sum(np.exp(v - msafe) for v in logs)
    with np.errstate(divide="ignore"):
        out = np.log(acc) + msafe
    return np.where(fin, out, -np.inf + 0j)


class HalfLineFunction:
    """A complex function on (0, inf); subclasses implement ``log_eval``."""

    log_extent = 700.0

    def log_eval(self, lx):
        raise NotImplementedError

    def eval_log(self, lx):
        with np.errstate(over="ignore", under="ignore"):
            return np.exp(self.log_eval(np.asarray(lx, dtype=float)))

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        out = self.eval_log(np.log(x))
        return out[()] if np.ndim(out) == 0 else out

    def __mul__(self, other):
        return Product([self, _lift(other)])

    __rmul__ = __mul__

    def __add__(self, other):
        return Sum([self, _lift(other)])

    __radd__ = __add__

    @classmethod
    def from_callable(cls, fn, name: str = "callable", log_fn=None) -> "HalfLineFunction":
        return _Callable(fn, name, log_fn)

    def describe(self) -> str:
        return type(self).__name__


def _lift(v) -> HalfLineFunction:
    if isinstance(v, HalfLineFunction):
        return v
    return Constant(complex(v))


class Builtin(HalfLineFunction):
    def __init__(self, name: str, log_fn, label: str | None = None):
        self.name = name
        self._log_fn = log_fn
        self.label = label or name

    def log_eval(self, lx):
        lx = np.asarray(lx, dtype=float)
        with np.errstate(divide="ignore", over="ignore"):
            return np.asarray(self._log_fn(lx), dtype=complex) + np.zeros(lx.shape)

    def describe(self) -> str:
        return self.label


class Constant(HalfLineFunction):
    def __init__(self, c: complex):
        self.c = complex(c)

    def log_eval(self, lx):
        with np.errstate(divide="ignore"):
            return np.full(np.shape(lx), np.log(self.c) if self.c != 0 else -np.inf, dtype=complex)

    def describe(self) -> str:
        return f"{self.c.real:g}" if self.c.imag == 0 else f"({self.c.real:g},{self.c.imag:g})"


class Product(HalfLineFunction):
    def __init__(self, factors):
        self.factors = list(factors)

    def log_eval(self, lx):
        return sum(f.log_eval(lx) for f in self.factors)

    def describe(self) -> str:
        return " * ".join(_paren(f) for f in self.factors)


class Sum(HalfLineFunction):
    def __init__(self, terms):
        self.terms = list(terms)

    def log_eval(self, lx):
        return _logsumexp([t.log_eval(lx) for t in self.terms])

    def describe(self) -> str:
        return " + ".join(t.describe() for t in self.terms)


def _paren(f):
    return f"({f.describe()})" if isinstance(f, Sum) else f.describe()


class _Callable(HalfLineFunction):
    def __init__(self, fn, name, log_fn=None):
        self.fn = fn
        self.name = name
        self.log_fn = log_fn

    def log_eval(self, lx):
        lx = np.asarray(lx, dtype=float)
        if self.log_fn is not None:
            return np.asarray(self.log_fn(lx), dtype=complex) + np.zeros(lx.shape)
        with np.errstate(divide="ignore", over="ignore"):
            return np.log(np.asarray(self.fn(np.exp(lx)), dtype=complex) + np.zeros(lx.shape))

    def describe(self) -> str:
        return self.name


class Table(HalfLineFunction):
    """Sampled function, log-log linear inside, power-law extrapolated outside.

    Complex values are interpolated through their logarithm (modulus and
    unwrapped phase).  Tables containing exact zeros fall back to linear
    interpolation in ln x with zero extrapolation.
    """

    def __init__(self, x, values, source: str = "table"):
        x = np.asarray(x, dtype=float)
        v = np.asarray(values, dtype=complex)
        if x.ndim != 1 or x.size < 2 or v.shape != x.shape:
            raise TableError("table needs at least two (x, value) rows")
        if np.any(~(x > 0)):
            raise TableError("table x-values must be positive")
        if np.any(np.diff(x) <= 0):
            raise TableError("table x-values must be strictly increasing")
        if not np.all(np.isfinite(v)):
            raise TableError("table values must be finite")
        self.x = x
        self.values = v
        self.source = source
        self._lx = np.log(x)
        self._has_zero = bool(np.any(v == 0))
        if not self._has_zero:
            self._lmod = np.log(np.abs(v))
            self._phase = np.unwrap(np.angle(v))

    @classmethod
    def from_csv(cls, path) -> "Table":
        path = Path(path)
        try:
            with path.open(newline="") as fh:
                rows = [r for r in csv.reader(fh) if r and not r[0].lstrip().startswith("#")]
        except OSError as exc:
            raise TableError(f"cannot read table {path}: {exc}") from None
        if rows and not _is_number(rows[0][0]):
            header = [h.strip() for h in rows[0]]
            rows = rows[1:]
        else:
            header = None
        try:
            if header and "x" in header:
                ix = header.index("x")
                ire = header.index("re_f") if "re_f" in header else ix + 1
                iim = header.index("im_f") if "im_f" in header else None
            else:
                ix, ire = 0, 1
                iim = 2 if rows and len(rows[0]) > 2 else None
            x = [float(r[ix]) for r in rows]
            v = [complex(float(r[ire]), float(r[iim]) if iim is not None else 0.0) for r in rows]
        except (ValueError, IndexError) as exc:
            raise TableError(f"malformed table {path}: {exc}") from None
        return cls(x, v, source=str(path))

    def _interp(self, lx, y):
        lx = np.asarray(lx, dtype=float)
        out = np.interp(lx, self._lx, y)
        left = (y[1] - y[0]) / (self._lx[1] - self._lx[0])
        right = (y[-1] - y[-2]) / (self._lx[-1] - self._lx[-2])
        out = np.where(lx < self._lx[0], y[0] + left * (lx - self._lx[0]), out)
        return np.where(lx > self._lx[-1], y[-1] + right * (lx - self._lx[-1]), out)

    def log_eval(self, lx):
        lx = np.asarray(lx, dtype=float)
        if not self._has_zero:
            return self._interp(lx, self._lmod) + 1j * self._interp(lx, self._phase)
        inside = (lx >= self._lx[0]) & (lx <= self._lx[-1])
        re = np.interp(lx, self._lx, self.values.real)
        im = np.interp(lx, self._lx, self.values.imag)
        val = np.where(inside, re + 1j * im, 0)
        with np.errstate(divide="ignore"):
            return np.log(val.astype(complex))

    def extrapolated(self, lx) -> np.ndarray:
        lx = np.asarray(lx, dtype=float)
        return (lx < self._lx[0]) | (lx > self._lx[-1])

    def describe(self) -> str:
        return f"table:{self.source}"


def _is_number(s: str) -> bool:
    try:
        float(s)
        return True
    except ValueError:
        return False


# --------------------------------------------------------------------------
# builtins


def h() -> Builtin:
    return Builtin("h", lambda lx: -np.logaddexp(0.0, lx))


def h2() -> Builtin:
    return Builtin("h2", lambda lx: -np.logaddexp(0.0, 2 * lx))


def expneg() -> Builtin:
    return Builtin("expneg", lambda lx: -np.exp(lx))


def invlog2sq() -> Builtin:
    return Builtin("invlog2sq", lambda lx: -2.0 * np.log(np.logaddexp(LN2, lx)))


def power(p: float) -> Builtin:
    p = float(p)
    return Builtin("pow", lambda lx: p * lx, label=f"pow:{p:g}")


def log_x() -> Builtin:
    return Builtin("log", lambda lx: np.log(lx.astype(complex)))


def zero() -> Constant:
    return Constant(0)


def one() -> Constant:
    return Constant(1)


def profile(which: str, alpha: complex) -> Builtin:
    alpha = complex(alpha)
    _check_alpha(which, alpha)
    label = f"{which}:{alpha.real:g}" + (f",{alpha.imag:g}" if alpha.imag else "")
    return Builtin(which, lambda lx: log_profile(which, lx, alpha), label=label)


_NULLARY = {"h": h, "h2": h2, "expneg": expneg, "invlog2sq": invlog2sq, "log": log_x,
            "zero": zero, "one": one}


# --------------------------------------------------------------------------
# parser

_TOKEN = re.compile(r"\s*(?:(?P<num>\d+\.?\d*(?:[eE][-+]?\d+)?|\.\d+(?:[eE][-+]?\d+)?)"
                    r"|(?P<name>[A-Za-z][A-Za-z0-9_]*)(?::(?P<arg>[^\s()*+]*(?:\([^)]*\))?[^\s()*+]*))?"
                    r"|(?P<op>[()*+-]))")


class _Parser:
    def __init__(self, text: str, base_dir: Path | None):
        self.text = text
        self.base_dir = base_dir
        self.toks = []
        pos = 0
        while pos < len(text):
            if text[pos:].strip() == "":
                break
            m = _TOKEN.match(text, pos)
            if not m or m.end() == pos:
                pos += len(text[pos:]) - len(text[pos:].lstrip())
                raise ParseError(f"unexpected character {text[pos]!r}", pos)
            start = m.start() + (len(m.group(0)) - len(m.group(0).lstrip()))
            self.toks.append((m, start))
            pos = m.end()
        self.i = 0

    def peek(self):
        return self.toks[self.i] if self.i < len(self.toks) else (None, len(self.text))

    def op(self, c):
        m, _ = self.peek()
        if m is not None and m.group("op") == c:
            self.i += 1
            return True
        return False

    def parse(self):
        if not self.toks:
            raise ParseError("empty g-spec", 0)
        node = self.expr()
        m, pos = self.peek()
        if m is not None:
            raise ParseError(f"unexpected token {m.group(0).strip()!r}", pos)
        return node

    def expr(self):
        terms = [self.term()]
        while self.op("+"):
            terms.append(self.term())
        return terms[0] if len(terms) == 1 else Sum(terms)

    def term(self):
        factors = [self.factor()]
        while self.op("*"):
            factors.append(self.factor())
        return factors[0] if len(factors) == 1 else Product(factors)

    def factor(self):
        sign = -1.0 if self.op("-") else 1.0
        if self.op("("):
            node = self.expr()
            if not self.op(")"):
                raise ParseError("missing ')'", self.peek()[1])
            return node if sign > 0 else Product([Constant(-1), node])
        m, pos = self.peek()
        if m is None:
            raise ParseError("unexpected end of g-spec", pos)
        self.i += 1
        if m.group("num"):
            return Constant(sign * float(m.group("num")))
        if m.group("name") is None:
            raise ParseError(f"unexpected token {m.group(0).strip()!r}", pos)
        node = self.atom(m.group("name"), m.group("arg"), pos)
        return node if sign > 0 else Product([Constant(-1), node])

    def atom(self, name, arg, pos):
        if name in _NULLARY:
            if arg is not None:
                raise ParseError(f"{name} takes no argument", pos)
            return _NULLARY[name]()
        if arg is None or arg == "":
            raise ParseError(f"{name} needs an argument ({name}:<value>)", pos)
        try:
            if name == "pow":
                return power(float(arg))
            if name in ("r1", "r2", "r3"):
                return profile(name, parse_complex(arg))
        except ValueError as exc:
            if isinstance(exc, ParseError):
                raise
            raise ParseError(f"bad argument for {name}: {exc}", pos) from None
        if name == "table":
            path = Path(arg)
            if not path.is_absolute() and self.base_dir is not None:
                path = self.base_dir / path
            return Table.from_csv(path)
        raise ParseError(f"unknown function {name!r}", pos)


def parse_gspec(text: str, base_dir=None) -> HalfLineFunction:
    """Parse a g-spec such as ``"pow:-0.3 * expneg"`` into a function."""
    node = _Parser(str(text), Path(base_dir) if base_dir else None).parse()
    node.spec_text = str(text)
    return node
