"""
Symbolic drift and diffusion fields for custom systems.

Expressions use the variables ``x1 .. xd``, numeric literals, the constants
``pi`` and ``e``, the operators ``+ - * / **`` and the functions listed in
``FUNCTIONS``. They are parsed with sympy against an allow-listed symbol
table, differentiated symbolically and lambdified to numpy, so compiled
fields accept batches of points.
"""

import re
from typing import Callable, Dict, List, Optional, Sequence, Set, Tuple, Union

import numpy as np
import sympy as sp
from sympy.parsing.sympy_parser import parse_expr, standard_transformations

from ..validators import ValidationError

_z = sp.Symbol("z", real=True)

FUNCTIONS: Dict[str, object] = {
    "sin": sp.sin,
    "cos": sp.cos,
    "tan": sp.tan,
    "tanh": sp.tanh,
    "arctan": sp.atan,
    "exp": sp.exp,
    "log": sp.log,
    "sqrt": sp.sqrt,
    "abs": sp.Abs,
    "sigmoid": sp.Lambda(_z, (1 + sp.tanh(_z / 2)) / 2),
}

CONSTANTS = {"pi": sp.pi, "e": sp.E}

# Names parse_expr emits for literals; nothing else is reachable during evaluation.
_PARSER_GLOBALS = {
    "__builtins__": {},
    "Integer": sp.Integer,
    "Float": sp.Float,
    "Rational": sp.Rational,
}

_ALLOWED_CHARS = re.compile(r"^[0-9A-Za-z_+\-*/(). ]+$")
_IDENTIFIER = re.compile(r"(?<![0-9])[A-Za-z_][A-Za-z0-9_]*")
_VARIABLE = re.compile(r"^x([1-9][0-9]*)$")

ScalarExpr = Union[str, sp.Expr]
ArrayFn = Callable[[np.ndarray], np.ndarray]


def state_symbols(dimension: int) -> Tuple[sp.Symbol, ...]:
    """The real symbols x1 .. xd."""
    return tuple(sp.Symbol(f"x{i + 1}", real=True) for i in range(dimension))


def _check_names(expr: str, dimension: Optional[int]) -> int:
    """Reject unknown identifiers; returns the largest variable index read."""
    highest = 0
    for name in _IDENTIFIER.findall(expr):
        match = _VARIABLE.match(name)
        if match:
            index = int(match.group(1))
            if dimension is not None and index > dimension:
                raise ValidationError(f"Variable {name} exceeds dimension {dimension} in {expr!r}")
            highest = max(highest, index)
        elif name not in FUNCTIONS and name not in CONSTANTS:
            raise ValidationError(
                f"Unknown name {name!r} in {expr!r}; allowed functions: {sorted(FUNCTIONS)}"
            )
    return highest


def parse_expression(expr: ScalarExpr, dimension: Optional[int] = None) -> sp.Expr:
    """Parse one scalar expression into a real sympy expression in x1 .. xd.

    Raises:
        ValidationError: On syntax outside the supported grammar, unknown names,
            or values that are not finite reals
    """
    if isinstance(expr, sp.Expr):
        parsed = expr
    else:
        if not isinstance(expr, str) or not expr.strip():
            raise ValidationError("expression must be a non-empty string")
        if not _ALLOWED_CHARS.match(expr):
            raise ValidationError(f"Unsupported characters in {expr!r}")
        highest = _check_names(expr, dimension)
        table: Dict[str, object] = {**FUNCTIONS, **CONSTANTS}
        for i, sym in enumerate(state_symbols(max(highest, dimension or 0))):
            table[f"x{i + 1}"] = sym
        try:
            parsed = parse_expr(expr, local_dict=table, global_dict=dict(_PARSER_GLOBALS),
                                transformations=standard_transformations)
        except Exception as e:  # parse_expr re-raises tokenizer and eval errors unchanged
            raise ValidationError(f"Invalid expression {expr!r}: {e}")
        if not isinstance(parsed, sp.Expr):
            raise ValidationError(f"Expression {expr!r} is not a scalar")

    if parsed.has(sp.I, sp.zoo, sp.oo, -sp.oo, sp.nan):
        raise ValidationError(f"Expression {expr!r} is not a finite real")
    return parsed


def referenced_variables(expr: ScalarExpr) -> Set[int]:
    """Zero-based indices of the state variables an expression reads."""
    found = set()
    for sym in parse_expression(expr).free_symbols:
        match = _VARIABLE.match(sym.name)
        if match:
            found.add(int(match.group(1)) - 1)
    return found


def _lambdify(parsed: sp.Expr, dimension: int) -> ArrayFn:
    fn = sp.lambdify(state_symbols(dimension), parsed, "numpy")

    def scalar_field(x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        value = np.asarray(fn(*np.moveaxis(x, -1, 0)), dtype=float)
        return np.array(np.broadcast_to(value, x.shape[:-1]))

    return scalar_field


def compile_expression(expr: ScalarExpr, dimension: int) -> ArrayFn:
    """Compile one scalar expression into a batched function ``(..., d) -> (...)``."""
    return _lambdify(parse_expression(expr, dimension), dimension)


def _parse_components(exprs: Sequence[ScalarExpr], dimension: int) -> List[sp.Expr]:
    if len(exprs) != dimension:
        raise ValidationError(f"expected {dimension} component expressions, got {len(exprs)}")
    return [parse_expression(e, dimension) for e in exprs]


def _stack_fields(fields: List[ArrayFn], axis: int) -> ArrayFn:
    def stacked(x: np.ndarray) -> np.ndarray:
        return np.stack([fn(x) for fn in fields], axis=axis)

    return stacked


def compile_vector_expressions(exprs: Sequence[ScalarExpr], dimension: int) -> ArrayFn:
    """Compile d component expressions into a batched vector field ``(..., d) -> (..., d)``."""
    return _stack_fields([_lambdify(p, dimension) for p in _parse_components(exprs, dimension)], -1)


def compile_matrix_expressions(rows: Sequence[Sequence[ScalarExpr]], dimension: int) -> ArrayFn:
    """Compile a d x d array of expressions into a batched field ``(..., d) -> (..., d, d)``."""
    return _stack_fields([compile_vector_expressions(row, dimension) for row in rows], -2)


def symbolic_jacobian(exprs: Sequence[ScalarExpr], dimension: int) -> sp.Matrix:
    """The d x d matrix of partial derivatives of the component expressions."""
    field = sp.Matrix(_parse_components(exprs, dimension))
    return field.jacobian(sp.Matrix(state_symbols(dimension)))


def compile_jacobian(exprs: Sequence[ScalarExpr], dimension: int) -> ArrayFn:
    """Analytic Jacobian of a vector field as a batched ``(..., d) -> (..., d, d)`` function."""
    jac = symbolic_jacobian(exprs, dimension)
    return compile_matrix_expressions([list(jac.row(i)) for i in range(dimension)], dimension)
