"""Variable-coefficient linear differential operators of order M >= 2.

An operator is a finite sum of coefficient fields times partial derivatives,
L u = sum_{0 <= k+l <= M} c_{k,l}(x,y) d_x^k d_y^l u.  This module models L
near a point, checks the two structural hypotheses the phase construction
needs (nonvanishing leading coefficient; factorizable order-2 symbol), and
applies the induced operator on phases,

    P  |->  L(e^P) / e^P - c_{0,0},

as truncated series arithmetic.  The derivative ratios E_{k,l} =
d_x^k d_y^l(e^P)/e^P satisfy E_{k+1,l} = d_x E_{k,l} + (d_x P) E_{k,l},
which costs polynomially many series operations; the partition-sum route in
`gpw.faa` computes the same object combinatorially and serves as its oracle.
"""

from __future__ import annotations

import ast
import cmath
from dataclasses import dataclass, field

import numpy as np

from gpw.taylor2d import (
    Index,
    TaylorSeries2,
    ts_constant,
    ts_coordinate,
    ts_cos,
    ts_derive,
    ts_mul,
    ts_sin,
)

HYP1_RTOL = 1e-10  # leading coefficient must clear this times the largest one


def principal_sqrt(z: complex) -> complex:
    """Principal square root; a negative real input with imaginary part -0.0
    would otherwise fall on the wrong side of the branch cut.
    """
    z = complex(z)
    if z.imag == 0:
        z = complex(z.real, 0.0)
    return cmath.sqrt(z)


@dataclass(frozen=True)
class PdeOperator:
    """Operator of order M localized at a center, with series coefficients.

    coeffs maps the derivative index (k, l) to the Taylor series of its
    coefficient field about the shared center; absent indices mean zero.
    q is the construction order the operator was instantiated for.
    """

    M: int
    center: tuple[float, float]
    coeffs: dict[Index, TaylorSeries2]
    q: int

    def __post_init__(self) -> None:
        if self.M < 2:
            raise ValueError(f"operator order {self.M} < 2")
        if self.q < 1:
            raise ValueError(f"construction order {self.q} < 1")
        for (k, l), series in self.coeffs.items():
            if k < 0 or l < 0 or k + l > self.M:
                raise ValueError(f"coefficient index ({k},{l}) outside order {self.M}")
            if series.center != self.center:
                raise ValueError(
                    f"coefficient ({k},{l}) centered at {series.center}, "
                    f"operator at {self.center}"
                )

    def coefficient_at_center(self, k: int, l: int) -> complex:
        series = self.coeffs.get((k, l))
        return complex(series[(0, 0)]) if series is not None else 0j

    def principal_at_center(self) -> complex:
        """Value of the (M, 0) coefficient at the center (Hypothesis 1 pivot)."""
        return self.coefficient_at_center(self.M, 0)


@dataclass(frozen=True)
class SymbolFactorization:
    """Congruence factorization gamma = A^T D A of a symmetric 2x2 symbol."""

    gamma: np.ndarray
    A: np.ndarray
    D: np.ndarray
    valid: bool

    def inverse_sqrt_D(self) -> np.ndarray:
        """diag(1/sqrt(mu1), 1/sqrt(mu2)), principal square roots."""
        if not self.valid:
            raise ValueError("factorization is degenerate")
        return np.diag([1 / principal_sqrt(self.D[0, 0]), 1 / principal_sqrt(self.D[1, 1])])


@dataclass(frozen=True)
class HypothesisReport:
    hyp1: bool
    hyp2: SymbolFactorization | None
    principal_value: complex = 0j


def factor_principal_symbol(gamma: np.ndarray) -> SymbolFactorization:
    """Factor a symmetric 2x2 gamma as A^T D A with D diagonal.

    Branch order is fixed for determinism: complete the square on the first
    variable when gamma[0,0] != 0, on the second when only gamma[1,1] != 0,
    and rotate X = U+V, Y = U-V for a pure cross term.  valid is False iff
    the resulting D has a zero diagonal entry.
    """
    gamma = np.asarray(gamma, dtype=complex)
    g1, g3 = gamma[0, 0], gamma[1, 1]
    g2 = gamma[0, 1] + gamma[1, 0]  # full cross coefficient of the form
    if g1 != 0:
        A = np.array([[1, g2 / (2 * g1)], [0, 1]], dtype=complex)
        D = np.diag([g1, g3 - g2**2 / (4 * g1)])
    elif g3 != 0:
        A = np.array([[1, 0], [g2 / (2 * g3), 1]], dtype=complex)
        D = np.diag([g1 - g2**2 / (4 * g3), g3])
    elif g2 != 0:
        # X = U+V, Y = U-V turns g2*XY into g2*U^2 - g2*V^2
        A = np.array([[0.5, 0.5], [0.5, -0.5]], dtype=complex)
        D = np.diag([g2, -g2])
    else:
        return SymbolFactorization(gamma, np.eye(2, dtype=complex), np.zeros((2, 2), dtype=complex), False)
    valid = bool(D[0, 0] != 0 and D[1, 1] != 0)
    return SymbolFactorization(gamma, A, D, valid)


def principal_symbol_matrix(op: PdeOperator) -> np.ndarray:
    """Symmetric matrix of the order-2 symbol in the sign convention that
    makes the first-order phase equation read (l1, l2) gamma (l1, l2)^T = -kappa^2.

    The order-M term contributes c_{k,l} (d_x P)^k (d_y P)^l to the constant
    residual coefficient, so the form that must equal -c_{0,0} is built from
    the coefficients directly; moving it across the equation negates it.
    """
    if op.M != 2:
        raise ValueError("order-2 symbol only")
    a20 = op.coefficient_at_center(2, 0)
    a11 = op.coefficient_at_center(1, 1)
    a02 = op.coefficient_at_center(0, 2)
    return -np.array([[a20, a11 / 2], [a11 / 2, a02]], dtype=complex)


def check_hypotheses(op: PdeOperator) -> HypothesisReport:
    """Hypothesis 1: leading (M,0) coefficient nonzero at the center.
    Hypothesis 2 (M = 2 only): order-2 symbol factorizable with nonzero
    diagonal; higher even orders would need a perfect-power detection that
    is ill-posed in floating point, so callers assert their own there.
    """
    principal = op.principal_at_center()
    largest = max(
        (abs(op.coefficient_at_center(k, l)) for (k, l) in op.coeffs), default=0.0
    )
    hyp1 = abs(principal) > HYP1_RTOL * largest and largest > 0
    hyp2 = None
    if op.M == 2:
        factorization = factor_principal_symbol(principal_symbol_matrix(op))
        hyp2 = factorization if factorization.valid else None
    return HypothesisReport(hyp1=hyp1, hyp2=hyp2, principal_value=principal)


def apply_phase_operator(op: PdeOperator, P: TaylorSeries2, Q: int) -> TaylorSeries2:
    """Series of L(e^P)/e^P - c_{0,0} about the center, truncated at Q.

    Needs P.order >= Q + M: each derivative ratio E_{k,l} loses k+l orders.
    """
    if P.center != op.center:
        raise ValueError(f"phase centered at {P.center}, operator at {op.center}")
    if P.order < Q + op.M:
        raise ValueError(f"phase order {P.order} < Q + M = {Q + op.M}")
    for (k, l), series in op.coeffs.items():
        if k + l >= 1 and series.order < Q:
            raise ValueError(f"coefficient ({k},{l}) order {series.order} < {Q}")
    dx_phase = ts_derive(P, (1, 0))
    dy_phase = ts_derive(P, (0, 1))
    ratios: dict[Index, TaylorSeries2] = {(0, 0): ts_constant(1.0, op.center, P.order)}
    for s in range(1, op.M + 1):
        for k in range(s, -1, -1):
            l = s - k
            if k:
                prev = ratios[(k - 1, l)]
                step = ts_derive(prev, (1, 0)) + ts_mul(dx_phase, prev, order=prev.order - 1)
            else:
                prev = ratios[(0, l - 1)]
                step = ts_derive(prev, (0, 1)) + ts_mul(dy_phase, prev, order=prev.order - 1)
            ratios[(k, l)] = step
    total = None
    for (k, l), series in op.coeffs.items():
        if k + l < 1:
            continue
        term = ts_mul(series, ratios[(k, l)], order=Q)
        total = term if total is None else total + term
    if total is None:
        raise ValueError("operator has no derivative terms")
    return total


def residual_series(op: PdeOperator, P: TaylorSeries2, Q: int) -> TaylorSeries2:
    """L(e^P)/e^P truncated at Q; identically zero iff e^P solves L u = 0.

    The phase P is an order-q quasi-solution exactly when all coefficients
    of length < q vanish here.
    """
    out = apply_phase_operator(op, P, Q)
    zeroth = op.coeffs.get((0, 0))
    if zeroth is not None:
        if zeroth.order < Q:
            raise ValueError(f"zeroth coefficient order {zeroth.order} < {Q}")
        out = out + zeroth.with_order(Q)
    return out


# ---------------------------------------------------------------------------
# coefficient authoring: tiny closed-form expression grammar
#
#   expr := number | x | y | sin(x) | sin(y) | cos(x) | cos(y)
#         | expr + expr | expr - expr | expr * expr | expr ** nonneg_int
#         | -expr | (expr)
#
# parsed through the Python ast so precedence and parentheses behave exactly
# as written; anything outside the whitelist is rejected.

_ALLOWED_CALLS = {"sin", "cos"}


@dataclass(frozen=True)
class CoefficientExpr:
    """A parsed coefficient expression, instantiable at any center/order."""

    text: str
    tree: ast.Expression = field(repr=False, compare=False)

    def build(self, center: tuple[float, float], order: int) -> TaylorSeries2:
        value = _build_node(self.tree.body, center, order)
        if isinstance(value, TaylorSeries2):
            return value
        return ts_constant(value, center, order)


def parse_coefficient(text: str) -> CoefficientExpr:
    try:
        tree = ast.parse(text, mode="eval")
    except SyntaxError as exc:
        raise ValueError(f"unparseable coefficient {text!r}: {exc}") from None
    _validate_node(tree.body, text)
    return CoefficientExpr(text=text, tree=tree)


def _validate_node(node: ast.AST, text: str) -> None:
    if isinstance(node, ast.Constant):
        if not isinstance(node.value, (int, float)):
            raise ValueError(f"non-numeric constant in {text!r}")
    elif isinstance(node, ast.Name):
        if node.id not in ("x", "y"):
            raise ValueError(f"unknown name {node.id!r} in {text!r}")
    elif isinstance(node, ast.BinOp):
        if not isinstance(node.op, (ast.Add, ast.Sub, ast.Mult, ast.Pow)):
            raise ValueError(f"operator {type(node.op).__name__} not allowed in {text!r}")
        if isinstance(node.op, ast.Pow):
            if not (isinstance(node.right, ast.Constant) and isinstance(node.right.value, int) and node.right.value >= 0):
                raise ValueError(f"exponent must be a non-negative integer literal in {text!r}")
        _validate_node(node.left, text)
        if not isinstance(node.op, ast.Pow):
            _validate_node(node.right, text)
    elif isinstance(node, ast.UnaryOp):
        if not isinstance(node.op, (ast.USub, ast.UAdd)):
            raise ValueError(f"unary {type(node.op).__name__} not allowed in {text!r}")
        _validate_node(node.operand, text)
    elif isinstance(node, ast.Call):
        if not (isinstance(node.func, ast.Name) and node.func.id in _ALLOWED_CALLS):
            raise ValueError(f"only sin/cos calls allowed in {text!r}")
        if len(node.args) != 1 or node.keywords:
            raise ValueError(f"{node.func.id} takes one positional argument in {text!r}")
        arg = node.args[0]
        if not (isinstance(arg, ast.Name) and arg.id in ("x", "y")):
            raise ValueError(f"{node.func.id} argument must be x or y in {text!r}")
    else:
        raise ValueError(f"syntax {type(node).__name__} not allowed in {text!r}")


def _build_node(node: ast.AST, center, order: int):
    if isinstance(node, ast.Constant):
        return complex(node.value)
    if isinstance(node, ast.Name):
        return ts_coordinate(node.id, center, order)
    if isinstance(node, ast.Call):
        maker = ts_sin if node.func.id == "sin" else ts_cos
        return maker(node.args[0].id, center, order)
    if isinstance(node, ast.UnaryOp):
        value = _build_node(node.operand, center, order)
        return value if isinstance(node.op, ast.UAdd) else -1 * value
    if isinstance(node, ast.BinOp):
        left = _build_node(node.left, center, order)
        if isinstance(node.op, ast.Pow):
            result: complex | TaylorSeries2 = 1 + 0j
            for _ in range(node.right.value):
                result = _combine(ast.Mult(), result, left, center, order)
            return result
        right = _build_node(node.right, center, order)
        return _combine(node.op, left, right, center, order)
    raise AssertionError(f"unvalidated node {node!r}")


def _combine(op: ast.operator, left, right, center, order: int):
    series_left = isinstance(left, TaylorSeries2)
    series_right = isinstance(right, TaylorSeries2)
    if not series_left and not series_right:
        if isinstance(op, ast.Add):
            return left + right
        if isinstance(op, ast.Sub):
            return left - right
        return left * right
    if isinstance(op, ast.Mult) and series_left != series_right:
        series, scalar = (left, right) if series_left else (right, left)
        return scalar * series
    if not series_left:
        left = ts_constant(left, center, order)
    if not series_right:
        right = ts_constant(right, center, order)
    if isinstance(op, ast.Add):
        return left + right
    if isinstance(op, ast.Sub):
        return left - right
    return ts_mul(left, right)


@dataclass(frozen=True)
class OperatorFamily:
    """An operator with coefficients given as expressions in x and y.

    Instantiating at a center produces a PdeOperator whose coefficient
    series are expanded there to the requested order.
    """

    M: int
    terms: dict[Index, str]
    name: str = ""

    def __post_init__(self) -> None:
        parsed = {ij: parse_coefficient(text) for ij, text in self.terms.items()}
        object.__setattr__(self, "_parsed", parsed)

    def instantiate(
        self, center: tuple[float, float], q: int, coeff_order: int | None = None
    ) -> PdeOperator:
        order = q - 1 if coeff_order is None else coeff_order
        coeffs = {ij: expr.build(center, order) for ij, expr in self._parsed.items()}
        return PdeOperator(M=self.M, center=center, coeffs=coeffs, q=q)
