"""Truncated Taylor jets with coefficients in C[E].

A :class:`Jet` is the local expansion of a function of ``u`` about ``u0``
whose Taylor coefficients are polynomials in the (unquantized) energy ``E``.
Storage is a dense 2-D array ``data[m, j]`` = coefficient of ``t**m * E**j``
with ``t = u - u0``.  :class:`ScalarJet` is the E-free special case and is the
only place transcendental compositions (exp, asinh, powers) are defined.

Arrays are either ``complex128`` (double mode) or ``object`` arrays holding
``mpmath.mpc`` values (extended mode).  Every operation keeps the dtype of its
inputs, so callers pick the precision once when building the base jets.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import mpmath
import numpy as np


class SeriesError(Exception):
    """Base class for jet arithmetic failures."""


class JetMismatchError(SeriesError, ValueError):
    """Raised when two jets with different ``u0`` or order are combined."""


class OrderExhaustedError(SeriesError):
    """Raised when differentiating an order-0 jet.

    In practice this means the jet order budget was too small for the number
    of AIM iterations requested.
    """


class SingularDivisionError(SeriesError, ZeroDivisionError):
    """Raised when dividing by a jet whose leading coefficient is not invertible."""


# ---------------------------------------------------------------------------
# precision helpers


def is_extended(arr: np.ndarray) -> bool:
    return arr.dtype == object


def as_ring(values, extended: bool = False) -> np.ndarray:
    """Coerce ``values`` to a 1-D or 2-D coefficient array of the chosen ring."""
    arr = np.asarray(values)
    if extended:
        out = np.empty(arr.shape, dtype=object)
        flat = out.reshape(-1)
        for i, v in enumerate(arr.reshape(-1)):
            flat[i] = mpmath.mpc(v)
        return out
    return np.array(arr, dtype=complex)


def _zeros(shape, like: np.ndarray) -> np.ndarray:
    if is_extended(like):
        out = np.empty(shape, dtype=object)
        out.fill(mpmath.mpc(0))
        return out
    return np.zeros(shape, dtype=complex)


def _exp(x, extended: bool):
    return mpmath.exp(x) if extended else cmath.exp(x)


def _pow(x, p, extended: bool):
    return mpmath.power(x, p) if extended else complex(x) ** p


def _is_zero(x) -> bool:
    return x == 0


def _check_finite(arr: np.ndarray) -> None:
    if is_extended(arr):
        for v in arr.reshape(-1):
            if not mpmath.isfinite(v):
                raise ValueError("non-finite coefficient")
    elif not np.all(np.isfinite(arr)):
        raise ValueError("non-finite coefficient")


# ---------------------------------------------------------------------------
# EnergyPoly


def _trim(c: np.ndarray) -> np.ndarray:
    n = len(c)
    while n and _is_zero(c[n - 1]):
        n -= 1
    return c[:n]


@dataclass(frozen=True, eq=False)
class EnergyPoly:
    """Dense polynomial in ``E``; ``coeffs[j]`` multiplies ``E**j``.

    The zero polynomial has an empty coefficient array.
    """

    coeffs: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coeffs)
        if c.dtype != object:
            c = np.array(c, dtype=complex)
        c = _trim(c.reshape(-1)).copy()
        _check_finite(c)
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @classmethod
    def from_list(cls, values: Iterable, extended: bool = False) -> "EnergyPoly":
        return cls(as_ring(list(values), extended))

    @classmethod
    def zero(cls) -> "EnergyPoly":
        return cls(np.zeros(0, dtype=complex))

    @property
    def degree(self) -> int:
        """Degree in ``E``; ``-1`` for the zero polynomial."""
        return len(self.coeffs) - 1

    def is_zero(self) -> bool:
        return len(self.coeffs) == 0

    def _binary(self, other: "EnergyPoly", sign: int) -> "EnergyPoly":
        a, b = self.coeffs, other.coeffs
        n = max(len(a), len(b))
        like = a if is_extended(a) or not is_extended(b) else b
        out = _zeros(n, like)
        out[: len(a)] += a
        if sign > 0:
            out[: len(b)] += b
        else:
            out[: len(b)] -= b
        return EnergyPoly(out)

    def __add__(self, other: "EnergyPoly") -> "EnergyPoly":
        return self._binary(other, +1)

    def __sub__(self, other: "EnergyPoly") -> "EnergyPoly":
        return self._binary(other, -1)

    def __neg__(self) -> "EnergyPoly":
        return EnergyPoly(-self.coeffs)

    def __mul__(self, other) -> "EnergyPoly":
        if not isinstance(other, EnergyPoly):
            return self.scale(other)
        if self.is_zero() or other.is_zero():
            return EnergyPoly.zero()
        return EnergyPoly(np.convolve(self.coeffs, other.coeffs))

    __rmul__ = __mul__

    def scale(self, z) -> "EnergyPoly":
        return EnergyPoly(self.coeffs * z)

    def __call__(self, e):
        """Horner evaluation at ``e``."""
        acc = 0j if not is_extended(self.coeffs) else mpmath.mpc(0)
        for c in self.coeffs[::-1]:
            acc = acc * e + c
        return acc

    def normalized(self) -> "EnergyPoly":
        """Return the polynomial scaled so its largest coefficient has modulus 1."""
        if self.is_zero():
            return self
        m = max(abs(c) for c in self.coeffs)
        return EnergyPoly(self.coeffs / m)

    def allclose(self, other: "EnergyPoly", rtol: float = 1e-13, atol: float = 0.0) -> bool:
        a, b = self.coeffs, other.coeffs
        n = max(len(a), len(b))
        pa = np.zeros(n, dtype=complex)
        pb = np.zeros(n, dtype=complex)
        pa[: len(a)] = [complex(v) for v in a]
        pb[: len(b)] = [complex(v) for v in b]
        scale = max(np.abs(pa).max(initial=0.0), np.abs(pb).max(initial=0.0))
        return bool(np.all(np.abs(pa - pb) <= atol + rtol * scale))

    def __eq__(self, other) -> bool:
        if not isinstance(other, EnergyPoly):
            return NotImplemented
        return len(self.coeffs) == len(other.coeffs) and all(
            x == y for x, y in zip(self.coeffs, other.coeffs)
        )

    def __repr__(self) -> str:
        terms = [f"({complex(c):.6g})E^{j}" for j, c in enumerate(self.coeffs)]
        return "EnergyPoly(" + (" + ".join(terms) or "0") + ")"


# ---------------------------------------------------------------------------
# ScalarJet


@dataclass(frozen=True, eq=False)
class ScalarJet:
    """Truncated Taylor expansion of an E-free function about ``u0``."""

    u0: float
    data: np.ndarray

    def __post_init__(self):
        d = np.asarray(self.data)
        if d.dtype != object:
            d = np.array(d, dtype=complex)
        d = d.reshape(-1).copy()
        if len(d) == 0:
            raise ValueError("a jet needs at least one coefficient")
        _check_finite(d)
        d.setflags(write=False)
        object.__setattr__(self, "data", d)

    @property
    def order(self) -> int:
        return len(self.data) - 1

    @property
    def coeffs(self) -> list:
        return list(self.data)

    @classmethod
    def constant(cls, value, u0: float, order: int, extended: bool = False) -> "ScalarJet":
        d = as_ring(np.zeros(order + 1), extended)
        d[0] = d[0] + value
        return cls(u0, d)

    @classmethod
    def identity(cls, u0: float, order: int, extended: bool = False) -> "ScalarJet":
        """Jet of ``u`` itself."""
        d = as_ring(np.zeros(order + 1), extended)
        d[0] = d[0] + u0
        if order >= 1:
            d[1] = d[1] + 1
        return cls(u0, d)

    @classmethod
    def from_poly(cls, poly_coeffs: Sequence, u0: float, order: int,
                  extended: bool = False) -> "ScalarJet":
        """Jet of the polynomial ``sum(poly_coeffs[i] * u**i)`` re-expanded about ``u0``."""
        out = cls.constant(0, u0, order, extended)
        power = cls.constant(1, u0, order, extended)
        u = cls.identity(u0, order, extended)
        for c in poly_coeffs:
            out = out + power * c
            power = power * u
        return out

    def _check(self, other: "ScalarJet") -> None:
        if self.u0 != other.u0 or self.order != other.order:
            raise JetMismatchError(
                f"jets at u0={self.u0}/order {self.order} and u0={other.u0}/order {other.order}"
            )

    def __add__(self, other):
        if isinstance(other, ScalarJet):
            self._check(other)
            return ScalarJet(self.u0, self.data + other.data)
        d = self.data.copy()
        d[0] = d[0] + other
        return ScalarJet(self.u0, d)

    __radd__ = __add__

    def __neg__(self):
        return ScalarJet(self.u0, -self.data)

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, ScalarJet):
            self._check(other)
            return ScalarJet(self.u0, np.convolve(self.data, other.data)[: self.order + 1])
        return ScalarJet(self.u0, self.data * other)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, ScalarJet):
            return self * other.reciprocal()
        return ScalarJet(self.u0, self.data / other)

    def reciprocal(self) -> "ScalarJet":
        return self.power(-1)

    def power(self, p) -> "ScalarJet":
        """``self ** p`` for real ``p`` via the J.C.P. Miller recurrence."""
        g = self.data
        if _is_zero(g[0]):
            raise SingularDivisionError("power of a jet with zero constant term")
        ext = is_extended(g)
        n = self.order
        h = _zeros(n + 1, g)
        h[0] = _pow(g[0], p, ext)
        for m in range(1, n + 1):
            acc = 0
            for j in range(1, m + 1):
                acc = acc + ((p + 1) * j - m) * g[j] * h[m - j]
            h[m] = acc / (m * g[0])
        return ScalarJet(self.u0, h)

    def derivative(self) -> "ScalarJet":
        if self.order == 0:
            raise OrderExhaustedError("cannot differentiate an order-0 jet")
        return ScalarJet(self.u0, self.data[1:] * np.arange(1, self.order + 1))

    def integral(self, constant) -> "ScalarJet":
        """Antiderivative with the given value at ``u0``, same order (top term dropped)."""
        d = _zeros(self.order + 1, self.data)
        d[0] = d[0] + constant
        d[1:] = self.data[:-1] / np.arange(1, self.order + 1)
        return ScalarJet(self.u0, d)

    def lift(self) -> "Jet":
        """View as a :class:`Jet` with degree-0 energy coefficients."""
        return Jet(self.u0, self.data.reshape(-1, 1))


def scalar_jet_exp(f: ScalarJet) -> ScalarJet:
    """Jet of ``exp(f)``: ``g0 = exp(f0)``, ``g_m = (1/m) sum_j j f_j g_{m-j}``."""
    fd = f.data
    g = _zeros(f.order + 1, fd)
    g[0] = _exp(fd[0], is_extended(fd))
    for m in range(1, f.order + 1):
        acc = 0
        for j in range(1, m + 1):
            acc = acc + j * fd[j] * g[m - j]
        g[m] = acc / m
    return ScalarJet(f.u0, g)


def scalar_jet_asinh(u0: float, order: int, extended: bool = False) -> ScalarJet:
    """Jet of ``asinh(u)`` at ``u0``, by integrating the jet of ``(1+u**2)**-1/2``."""
    if order < 0:
        raise ValueError("order must be >= 0")
    # one extra order so the integral keeps the requested length
    one_plus_u2 = ScalarJet.from_poly([1, 0, 1], u0, order + 1, extended)
    dasinh = one_plus_u2.power(-0.5 if not extended else mpmath.mpf(-1) / 2)
    c0 = mpmath.asinh(u0) if extended else math.asinh(u0)
    full = dasinh.integral(c0)
    # integral() of an order-(order+1) jet drops nothing we need beyond `order`
    return ScalarJet(u0, full.data[: order + 1])


# ---------------------------------------------------------------------------
# Jet


@dataclass(frozen=True, eq=False)
class Jet:
    """Truncated Taylor expansion about ``u0`` with :class:`EnergyPoly` coefficients.

    ``data`` has shape ``(order + 1, n_energy)``; columns past the true
    E-degree may be zero.
    """

    u0: float
    data: np.ndarray = field(repr=False)

    def __post_init__(self):
        d = np.asarray(self.data)
        if d.dtype != object:
            d = np.array(d, dtype=complex)
        if d.ndim == 1:
            d = d.reshape(-1, 1)
        if d.shape[0] == 0:
            raise ValueError("a jet needs at least one coefficient")
        if d.shape[1] == 0:
            d = _zeros((d.shape[0], 1), d)
        d = d.copy()
        d.setflags(write=False)
        object.__setattr__(self, "data", d)

    @classmethod
    def from_polys(cls, u0: float, polys: Sequence[EnergyPoly]) -> "Jet":
        width = max([len(p.coeffs) for p in polys] + [1])
        ext = any(is_extended(p.coeffs) for p in polys)
        d = as_ring(np.zeros((len(polys), width)), ext)
        for m, p in enumerate(polys):
            d[m, : len(p.coeffs)] += p.coeffs
        return cls(u0, d)

    @classmethod
    def constant(cls, poly: EnergyPoly, u0: float, order: int) -> "Jet":
        return cls.from_polys(u0, [poly] + [EnergyPoly.zero()] * order)

    @property
    def order(self) -> int:
        return self.data.shape[0] - 1

    @property
    def coeffs(self) -> list[EnergyPoly]:
        return [EnergyPoly(row) for row in self.data]

    @property
    def energy_degree(self) -> int:
        """Largest E-degree over all coefficients (``-1`` if identically zero)."""
        return max(p.degree for p in self.coeffs)

    def _check(self, other: "Jet") -> None:
        if self.u0 != other.u0 or self.order != other.order:
            raise JetMismatchError(
                f"jets at u0={self.u0}/order {self.order} and u0={other.u0}/order {other.order}"
            )

    def truncate(self, order: int) -> "Jet":
        if order > self.order:
            raise ValueError(f"cannot extend a jet from order {self.order} to {order}")
        return Jet(self.u0, self.data[: order + 1])

    def _padded(self, width: int) -> np.ndarray:
        d = self.data
        if d.shape[1] >= width:
            return d
        out = _zeros((d.shape[0], width), d)
        out[:, : d.shape[1]] = d
        return out

    def __add__(self, other: "Jet") -> "Jet":
        self._check(other)
        w = max(self.data.shape[1], other.data.shape[1])
        return Jet(self.u0, self._padded(w) + other._padded(w))

    def __neg__(self) -> "Jet":
        return Jet(self.u0, -self.data)

    def __sub__(self, other: "Jet") -> "Jet":
        return self + (-other)

    def scale(self, z) -> "Jet":
        return Jet(self.u0, self.data * z)

    def __mul__(self, other):
        if isinstance(other, Jet):
            return jet_mul(self, other)
        return self.scale(other)

    __rmul__ = __mul__

    def __truediv__(self, other: "Jet") -> "Jet":
        return jet_div(self, other)

    def derivative(self) -> "Jet":
        return jet_derivative(self)

    def value_at(self, e) -> np.ndarray:
        """Substitute ``E = e``; returns the scalar Taylor coefficients."""
        return np.array([p(e) for p in self.coeffs])


def _toeplitz_lower(col: np.ndarray) -> np.ndarray:
    n = len(col)
    t = _zeros((n, n), col)
    for i in range(n):
        t[i:, i] = col[: n - i]
    return t


def jet_mul(f: Jet, g: Jet) -> Jet:
    """Cauchy product in ``t`` (truncated at the common order) and full product in ``E``."""
    f._check(g)
    # iterate over the narrower energy axis; each slice is a Toeplitz matmul over t
    if f.data.shape[1] > g.data.shape[1]:
        f, g = g, f
    n = f.order + 1
    wf, wg = f.data.shape[1], g.data.shape[1]
    out = _zeros((n, wf + wg - 1), g.data)
    for e in range(wf):
        col = f.data[:, e]
        if all(_is_zero(c) for c in col):
            continue
        out[:, e : e + wg] += _toeplitz_lower(col) @ g.data
    return Jet(f.u0, out)


def jet_div(f: Jet, g: Jet) -> Jet:
    """Return ``h`` with ``g * h == f`` through the common order.

    ``g`` must have an invertible E-free constant term; higher coefficients
    of ``g`` may depend on ``E``.
    """
    f._check(g)
    lead = g.coeffs[0]
    if lead.degree != 0 or _is_zero(lead.coeffs[0]):
        raise SingularDivisionError(f"leading coefficient {lead!r} is not an invertible scalar")
    g0 = lead.coeffs[0]
    gc = g.coeffs
    h: list[EnergyPoly] = []
    for m, fm in enumerate(f.coeffs):
        acc = fm
        for j in range(1, m + 1):
            if not gc[j].is_zero():
                acc = acc - gc[j] * h[m - j]
        h.append(acc.scale(1 / g0))
    return Jet.from_polys(f.u0, h)


def jet_derivative(f: Jet) -> Jet:
    """Term-by-term derivative; the result has order ``f.order - 1``."""
    if f.order == 0:
        raise OrderExhaustedError(
            "jet order exhausted; request a larger jet order for this many iterations"
        )
    k = np.arange(1, f.order + 1).reshape(-1, 1)
    return Jet(f.u0, f.data[1:] * k)
