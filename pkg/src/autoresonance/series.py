"""Truncated Laurent series in ``x = tau**(-1/2)``.

A :class:`HalfPowerSeries` stores the coefficients of ``x**lowest`` up to
``x**order``.  ``order`` records how far the coefficients are *known*:
arithmetic propagates it so that a result never claims coefficients that
depend on discarded terms of its operands.  With ``x = tau**(-1/2)`` the
slow-time derivative is exact on coefficients::

    d/dtau x**n = -(n / 2) x**(n + 2)
"""

from __future__ import annotations

import math
from typing import Union

import numpy as np

Number = Union[int, float]


class HalfPowerSeries:
    __slots__ = ("lowest", "coeffs")

    def __init__(self, lowest: int, coeffs):
        self.lowest = int(lowest)
        self.coeffs = np.array(coeffs, dtype=float)
        if self.coeffs.ndim != 1 or self.coeffs.size == 0:
            raise ValueError("coeffs must be a non-empty 1-d array")

    # -- construction -------------------------------------------------------

    @classmethod
    def constant(cls, c: Number, order: int) -> "HalfPowerSeries":
        out = np.zeros(order + 1)
        out[0] = c
        return cls(0, out)

    @classmethod
    def monomial(cls, n: int, order: int, c: Number = 1.0) -> "HalfPowerSeries":
        if order < n:
            raise ValueError("order below the monomial exponent")
        out = np.zeros(order - n + 1)
        out[0] = c
        return cls(n, out)

    @classmethod
    def from_dict(cls, terms: dict, order: int) -> "HalfPowerSeries":
        lo = min(terms)
        out = np.zeros(order - lo + 1)
        for n, c in terms.items():
            if n <= order:
                out[n - lo] = c
        return cls(lo, out)

    # -- bookkeeping --------------------------------------------------------

    @property
    def order(self) -> int:
        return self.lowest + self.coeffs.size - 1

    def __getitem__(self, n: int) -> float:
        """Coefficient of ``x**n`` (zero below ``lowest``)."""
        if n > self.order:
            raise IndexError(f"coefficient x^{n} is beyond the known order {self.order}")
        if n < self.lowest:
            return 0.0
        return float(self.coeffs[n - self.lowest])

    def truncate(self, order: int) -> "HalfPowerSeries":
        if order > self.order:
            raise ValueError(f"cannot extend a series known to order {self.order} to {order}")
        if order < self.lowest:
            return HalfPowerSeries(order, [0.0])
        return HalfPowerSeries(self.lowest, self.coeffs[: order - self.lowest + 1])

    def _aligned(self, other: "HalfPowerSeries"):
        lo = min(self.lowest, other.lowest)
        hi = min(self.order, other.order)
        a = np.zeros(hi - lo + 1)
        b = np.zeros(hi - lo + 1)
        na = max(0, min(self.coeffs.size, hi - self.lowest + 1))
        nb = max(0, min(other.coeffs.size, hi - other.lowest + 1))
        a[self.lowest - lo : self.lowest - lo + na] = self.coeffs[:na]
        b[other.lowest - lo : other.lowest - lo + nb] = other.coeffs[:nb]
        return lo, a, b

    # -- arithmetic ---------------------------------------------------------

    def __add__(self, other):
        if isinstance(other, HalfPowerSeries):
            lo, a, b = self._aligned(other)
            return HalfPowerSeries(lo, a + b)
        return self + HalfPowerSeries.constant(other, max(self.order, 0))

    __radd__ = __add__

    def __neg__(self):
        return HalfPowerSeries(self.lowest, -self.coeffs)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, HalfPowerSeries):
            return HalfPowerSeries(self.lowest, self.coeffs * other)
        lo = self.lowest + other.lowest
        hi = min(self.order + other.lowest, other.order + self.lowest)
        if hi < lo:
            return HalfPowerSeries(hi, [0.0])
        n = hi - lo + 1
        full = np.convolve(self.coeffs[:n], other.coeffs[:n])
        return HalfPowerSeries(lo, full[:n])

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, HalfPowerSeries):
            return self * other.reciprocal()
        return HalfPowerSeries(self.lowest, self.coeffs / other)

    def __rtruediv__(self, other):
        return self.reciprocal() * other

    def shift(self, n: int) -> "HalfPowerSeries":
        """Multiply by ``x**n``."""
        return HalfPowerSeries(self.lowest + n, self.coeffs)

    def deriv_tau(self) -> "HalfPowerSeries":
        """Exact ``d/dtau``; raises both ``lowest`` and ``order`` by 2."""
        n = np.arange(self.lowest, self.order + 1)
        return HalfPowerSeries(self.lowest + 2, -0.5 * n * self.coeffs)

    def deriv_x(self) -> "HalfPowerSeries":
        n = np.arange(self.lowest, self.order + 1)
        return HalfPowerSeries(self.lowest - 1, n * self.coeffs)

    def reciprocal(self) -> "HalfPowerSeries":
        """``1 / a`` for a series whose coefficient at ``lowest`` is nonzero."""
        c0 = self.coeffs[0]
        if c0 == 0.0:
            raise ZeroDivisionError("leading coefficient is zero")
        lo = self.lowest
        # a = c0 x^lo (1 + q), q has valuation >= 1 and is known to order - lo
        q = HalfPowerSeries(0, self.coeffs / c0) - 1.0
        inv = _geometric(q)
        return (inv * (1.0 / c0)).shift(-lo)

    def _split_constant(self):
        if self.lowest < 0 and np.any(self.coeffs[: -self.lowest] != 0.0):
            raise ValueError("trigonometric composition needs nonnegative exponents")
        a0 = self[0] if self.order >= 0 else 0.0
        rest = self - a0
        return a0, rest

    def sincos(self) -> tuple["HalfPowerSeries", "HalfPowerSeries"]:
        """``(sin(a), cos(a))`` truncated at ``a.order``."""
        a0, b = self._split_constant()
        order = self.order
        s_b = HalfPowerSeries.constant(0.0, order)
        c_b = HalfPowerSeries.constant(1.0, order)
        term = HalfPowerSeries.constant(1.0, order)
        k = 0
        while True:
            k += 1
            term = (term * b).truncate(order) * (1.0 / k)
            if not np.any(term.coeffs):
                break
            r = k % 4
            if r == 1:
                s_b = s_b + term
            elif r == 2:
                c_b = c_b - term
            elif r == 3:
                s_b = s_b - term
            else:
                c_b = c_b + term
            if k > order + 2:
                break
        sa, ca = math.sin(a0), math.cos(a0)
        return s_b * ca + c_b * sa, c_b * ca - s_b * sa

    def sin(self) -> "HalfPowerSeries":
        return self.sincos()[0]

    def cos(self) -> "HalfPowerSeries":
        return self.sincos()[1]

    # -- evaluation ---------------------------------------------------------

    def __call__(self, x):
        """Evaluate at ``x`` (scalar or array) by Horner's rule."""
        x = np.asarray(x, dtype=float)
        acc = np.zeros_like(x)
        for c in self.coeffs[::-1]:
            acc = acc * x + c
        return acc * x**self.lowest if self.lowest else acc

    def eval_tau(self, tau):
        return self(np.asarray(tau, dtype=float) ** -0.5)

    def __repr__(self):
        terms = " + ".join(f"{c:.6g} x^{n}" for n, c in zip(range(self.lowest, self.order + 1), self.coeffs) if c)
        return f"HalfPowerSeries({terms or '0'} + O(x^{self.order + 1}))"


def _geometric(q: HalfPowerSeries) -> HalfPowerSeries:
    """``1 / (1 + q)`` for ``q`` with zero constant term."""
    order = q.order
    out = HalfPowerSeries.constant(1.0, order)
    term = HalfPowerSeries.constant(1.0, order)
    for _ in range(order):
        term = -(term * q).truncate(order)
        out = out + term
    return out


def binomial_series(exponent: float, order: int) -> HalfPowerSeries:
    """``(1 + x**2)**exponent`` to ``order``."""
    out = np.zeros(order + 1)
    c = 1.0
    for j in range(0, order // 2 + 1):
        out[2 * j] = c
        c *= (exponent - j) / (j + 1)
    return HalfPowerSeries(0, out)
