"""Coefficient fields and nonlinearities.

Closed-form fields are parsed from a small expression language
(``x``, numeric constants, ``pi``, ``e``, ``+ - * / **``, ``sin``, ``cos``,
``exp``, ``pow``) into sympy trees, so exact derivatives come for free.
Tabulated fields are cubic splines through samples on a uniform grid of
``[0, 1]``.
"""

from __future__ import annotations

import ast
from typing import Callable, Sequence

import numpy as np
import sympy as sp
from scipy.interpolate import CubicSpline

from .errors import ConjscanError

X = sp.Symbol("x", real=True)
U = sp.Symbol("u", real=True)

_FUNCTIONS = {"sin": sp.sin, "cos": sp.cos, "exp": sp.exp, "pow": sp.Pow}
_CONSTANTS = {"pi": sp.pi, "e": sp.E}
_BINOPS = {
    ast.Add: lambda a, b: a + b,
    ast.Sub: lambda a, b: a - b,
    ast.Mult: lambda a, b: a * b,
    ast.Div: lambda a, b: a / b,
    ast.Pow: lambda a, b: a**b,
}

SMOOTHNESS_CLASSES = ("C0", "C1", "Cinf")


def parse_expression(text: str, variables: dict[str, sp.Symbol] | None = None) -> sp.Expr:
    """Parse ``text`` into a sympy expression over the whitelisted grammar.

    ``variables`` maps accepted identifiers to symbols; the default accepts
    ``x`` (and ``rho`` as an alias for it).
    """
    if variables is None:
        variables = {"x": X, "rho": X}
    try:
        tree = ast.parse(text.strip(), mode="eval")
    except SyntaxError as exc:
        raise ConjscanError("EXPRESSION_SYNTAX", str(exc), expression=text) from None

    def build(node):
        if isinstance(node, ast.Expression):
            return build(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)) \
                and not isinstance(node.value, bool):
            return sp.nsimplify(node.value) if isinstance(node.value, int) else sp.Float(node.value)
        if isinstance(node, ast.Name):
            if node.id in variables:
                return variables[node.id]
            if node.id in _CONSTANTS:
                return _CONSTANTS[node.id]
            raise ConjscanError("EXPRESSION_SYNTAX", f"unknown name {node.id!r}", expression=text)
        if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
            return _BINOPS[type(node.op)](build(node.left), build(node.right))
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
            inner = build(node.operand)
            return -inner if isinstance(node.op, ast.USub) else inner
        if isinstance(node, ast.Call) and isinstance(node.func, ast.Name) \
                and node.func.id in _FUNCTIONS and not node.keywords:
            args = [build(arg) for arg in node.args]
            expected = 2 if node.func.id == "pow" else 1
            if len(args) != expected:
                raise ConjscanError("EXPRESSION_SYNTAX", f"{node.func.id} takes {expected} argument(s)",
                                    expression=text)
            return _FUNCTIONS[node.func.id](*args)
        raise ConjscanError("EXPRESSION_SYNTAX", f"unsupported construct {type(node).__name__}",
                            expression=text)

    return build(tree)


def _vectorize(expr: sp.Expr, symbols: Sequence[sp.Symbol]) -> Callable:
    fn = sp.lambdify(symbols, expr, modules="numpy")

    def evaluate(*args):
        args = [np.asarray(a, dtype=float) for a in args]
        shape = np.broadcast_shapes(*(a.shape for a in args))
        out = np.asarray(fn(*args), dtype=float)
        if out.shape != shape:
            out = np.broadcast_to(out, shape).copy()
        return out

    return evaluate


class CoefficientField:
    """A real function on ``[0, 1]``, closed-form or tabulated."""

    def __init__(self, kind: str, source, smoothness: str, func: Callable, deriv: Callable | None):
        if smoothness not in SMOOTHNESS_CLASSES:
            raise ConjscanError("INVALID_SMOOTHNESS", f"expected one of {SMOOTHNESS_CLASSES}",
                                smoothness=smoothness)
        self.kind = kind
        self.source = source
        self.smoothness = smoothness
        self._func = func
        self._deriv = deriv

    @classmethod
    def from_expression(cls, text: str, smoothness: str = "Cinf") -> "CoefficientField":
        expr = parse_expression(text)
        return cls("expression", str(text).strip(), smoothness,
                   _vectorize(expr, [X]), _vectorize(sp.diff(expr, X), [X]))

    @classmethod
    def constant(cls, value: float) -> "CoefficientField":
        return cls.from_expression(repr(float(value)))

    @classmethod
    def from_table(cls, values: Sequence[float], smoothness: str = "C1") -> "CoefficientField":
        values = np.asarray(values, dtype=float)
        if values.ndim != 1 or values.size < 4:
            raise ConjscanError("INVALID_TABLE", "need at least 4 samples", size=values.size)
        if not np.all(np.isfinite(values)):
            raise ConjscanError("INVALID_TABLE", "non-finite sample")
        nodes = np.linspace(0.0, 1.0, values.size)
        spline = CubicSpline(nodes, values)
        dspline = spline.derivative()
        return cls("table", tuple(float(v) for v in values), smoothness,
                   lambda x: np.asarray(spline(x), dtype=float),
                   lambda x: np.asarray(dspline(x), dtype=float))

    def __call__(self, x) -> np.ndarray:
        return self._func(x)

    def derivative(self, x) -> np.ndarray:
        if self.smoothness == "C0":
            raise ConjscanError("DERIVATIVE_UNAVAILABLE", "field declared C0", field=self.describe())
        return self._deriv(x)

    def tabulate(self, samples: int = 2001) -> "CoefficientField":
        nodes = np.linspace(0.0, 1.0, samples)
        return CoefficientField.from_table(self(nodes), smoothness=self.smoothness)

    @property
    def is_constant(self) -> bool:
        if self.kind == "expression":
            return not parse_expression(self.source).has(X)
        return len(set(self.source)) == 1

    def describe(self) -> str:
        if self.kind == "expression":
            return self.source
        return "table:" + ",".join(repr(v) for v in self.source)

    def __repr__(self) -> str:
        text = self.describe()
        if len(text) > 60:
            text = text[:57] + "..."
        return f"CoefficientField({self.kind}, {text!r}, {self.smoothness})"


class Nonlinearity:
    """``g(x, u)`` with its partial derivative in ``u``.

    ``g`` must vanish on the trivial branch ``u = 0``; that is checked by
    :func:`conjscan.problem.validate`, not here.
    """

    def __init__(self, g: Callable, dg_dxi: Callable, growth_exponent: float = 1.0,
                 source: str | None = None):
        if growth_exponent < 1:
            raise ConjscanError("INVALID_NONLINEARITY", "growth exponent must be >= 1",
                                growth_exponent=growth_exponent)
        self.g = g
        self.dg_dxi = dg_dxi
        self.growth_exponent = float(growth_exponent)
        self.source = source

    @classmethod
    def from_expression(cls, text: str, growth_exponent: float = 1.0) -> "Nonlinearity":
        expr = parse_expression(text, {"x": X, "rho": X, "u": U, "xi": U})
        obj = cls(_vectorize(expr, [X, U]), _vectorize(sp.diff(expr, U), [X, U]),
                  growth_exponent, source=str(text).strip())
        obj._linear_part = sp.diff(expr, U).subs(U, 0)
        return obj

    def linearization(self) -> CoefficientField:
        """``f(x) = dg/du(x, 0)`` as a closed-form field (expression sources only)."""
        part = getattr(self, "_linear_part", None)
        if part is None:
            raise ConjscanError("DERIVATIVE_UNAVAILABLE", "linearization needs an expression source")
        return CoefficientField.from_expression(_to_text(part))

    def describe(self) -> str:
        return self.source if self.source is not None else "<callable>"

    def __repr__(self) -> str:
        return f"Nonlinearity({self.describe()!r}, alpha={self.growth_exponent})"


def _to_text(expr: sp.Expr) -> str:
    # sympy prints Euler's number as E; everything else is already in the grammar.
    return sp.sstr(expr, full_prec=True).replace("E", "e")
