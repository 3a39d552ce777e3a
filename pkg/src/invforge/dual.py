"""Forward-mode differentiation on dual numbers.

A :class:`Dual` carries a value together with the derivative of that value
along one seeded input direction.  Arithmetic is generic over the payload:
the two slots may hold floats, complex numbers, or further ``Dual`` values
(nesting one level gives exact second derivatives).  All rules are the
algebraic product/quotient/chain rules, so results are exact to rounding.
"""

from __future__ import annotations

import cmath
import math

_NUMBERS = (int, float, complex)


class EvaluationError(ArithmeticError):
    """A numeric evaluation could not proceed (non-finite intermediate,
    singular linear solve, or domain violation)."""


class Dual:
    """Value plus directional derivative along a single seeded direction."""

    __slots__ = ("value", "deriv")

    def __init__(self, value, deriv=0.0):
        self.value = value
        self.deriv = deriv

    def __repr__(self):
        return f"Dual({self.value!r}, {self.deriv!r})"

    def __add__(self, other):
        if isinstance(other, Dual):
            return Dual(self.value + other.value, self.deriv + other.deriv)
        if isinstance(other, _NUMBERS):
            return Dual(self.value + other, self.deriv)
        return NotImplemented

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, Dual):
            return Dual(self.value - other.value, self.deriv - other.deriv)
        if isinstance(other, _NUMBERS):
            return Dual(self.value - other, self.deriv)
        return NotImplemented

    def __rsub__(self, other):
        if isinstance(other, _NUMBERS):
            return Dual(other - self.value, -self.deriv)
        return NotImplemented

    def __mul__(self, other):
        if isinstance(other, Dual):
            return Dual(
                self.value * other.value,
                self.value * other.deriv + self.deriv * other.value,
            )
        if isinstance(other, _NUMBERS):
            return Dual(self.value * other, self.deriv * other)
        return NotImplemented

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Dual):
            inv = 1.0 / other.value
            return Dual(
                self.value * inv,
                (self.deriv - self.value * inv * other.deriv) * inv,
            )
        if isinstance(other, _NUMBERS):
            return Dual(self.value / other, self.deriv / other)
        return NotImplemented

    def __rtruediv__(self, other):
        if isinstance(other, _NUMBERS):
            inv = 1.0 / self.value
            return Dual(other * inv, -other * inv * inv * self.deriv)
        return NotImplemented

    def __neg__(self):
        return Dual(-self.value, -self.deriv)

    def __pos__(self):
        return self

    def __pow__(self, expo):
        if isinstance(expo, Dual):
            # f^g = exp(g log f); requires f away from the branch cut.
            return dexp(expo * dlog(self))
        if isinstance(expo, int):
            if expo == 0:
                return Dual(self.value ** 0, 0.0 * self.deriv)
            return Dual(
                self.value ** expo,
                expo * self.value ** (expo - 1) * self.deriv,
            )
        if isinstance(expo, _NUMBERS):
            return Dual(
                self.value ** expo,
                expo * self.value ** (expo - 1) * self.deriv,
            )
        return NotImplemented

    def __rpow__(self, base):
        if isinstance(base, _NUMBERS):
            return dexp(self * _scalar_log(base))
        return NotImplemented

    def __eq__(self, other):
        if isinstance(other, Dual):
            return self.value == other.value and self.deriv == other.deriv
        return NotImplemented

    def __hash__(self):
        return hash((self.value, self.deriv))


def value_of(x):
    """Strip all dual layers and return the underlying number."""
    while isinstance(x, Dual):
        x = x.value
    return x


def magnitude(x):
    """Absolute value of the underlying number (pivoting / tolerances)."""
    return abs(value_of(x))


def _scalar_exp(v):
    return cmath.exp(v) if isinstance(v, complex) else math.exp(v)


def _scalar_log(v):
    if isinstance(v, complex):
        return cmath.log(v)
    if v <= 0.0:
        return cmath.log(complex(v))
    return math.log(v)


def dexp(x):
    if isinstance(x, Dual):
        e = dexp(x.value)
        return Dual(e, e * x.deriv)
    return _scalar_exp(x)


def dlog(x):
    if isinstance(x, Dual):
        return Dual(dlog(x.value), x.deriv / x.value)
    return _scalar_log(x)


def is_finite(x) -> bool:
    v = value_of(x)
    if isinstance(v, complex):
        return math.isfinite(v.real) and math.isfinite(v.imag)
    return math.isfinite(v)


def value_grad(fn, args):
    """Value of ``fn(args)`` and its gradient with respect to each arg.

    One forward pass per argument; exact derivatives.
    """
    val = fn(list(args))
    grad = []
    for i in range(len(args)):
        seeded = [Dual(a, 1.0 if j == i else 0.0) for j, a in enumerate(args)]
        out = fn(seeded)
        grad.append(out.deriv if isinstance(out, Dual) else 0.0)
    return value_of(val), grad


def value_grad_hess(fn, args):
    """Value, gradient, and full Hessian of ``fn(args)`` via nested duals.

    The outer dual layer tracks direction ``j``, the inner layer direction
    ``i``; the (i, j) Hessian entry is the inner derivative of the outer one.
    """
    n = len(args)
    val = value_of(fn(list(args)))
    grad = [0.0] * n
    hess = [[0.0] * n for _ in range(n)]
    for j in range(n):
        for i in range(n):
            seeded = [
                Dual(
                    Dual(a, 1.0 if k == i else 0.0),
                    Dual(1.0 if k == j else 0.0, 0.0),
                )
                for k, a in enumerate(args)
            ]
            out = fn(seeded)
            if not isinstance(out, Dual):
                continue
            d = out.deriv  # derivative along j, still in the inner ring
            if isinstance(d, Dual):
                hess[i][j] = d.deriv
                if i == 0:
                    grad[j] = value_of(d)
            elif i == 0:
                grad[j] = value_of(d)
    return val, grad, hess
