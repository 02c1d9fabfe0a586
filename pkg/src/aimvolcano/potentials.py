"""The cosh-sech ("volcano") potential, its damped variant, and their AIM coefficients.

Both families share

    V(x) = -(b**2/4) cosh(x)**2 exp(-c x**2) - (a**2 - 1/4) sech(x)**2

with ``c = 0`` for the unbounded cosh-sech family.  After writing
``psi = exp(-f) y`` with ``f = i b sinh x + (a - 1/2) log cosh x`` and changing
variable to ``u = sinh x`` the Schrodinger equation becomes
``y'' = lambda0(u) y' + s0(u) y``; :func:`init_coeffs` builds those two
coefficient functions as jets.
"""

from __future__ import annotations

import enum
import math
import re
from dataclasses import dataclass, replace
from typing import Optional

import mpmath
import numpy as np

from .series import Jet, ScalarJet, scalar_jet_asinh, scalar_jet_exp


class Family(str, enum.Enum):
    COSH_SECH = "coshsech"
    MODIFIED = "modified"


class SpecSyntaxError(ValueError):
    """Raised for an unparsable potential string."""


class PotentialOverflowError(OverflowError):
    """Raised when V(x) is requested so far out that cosh(x)**2 is not representable."""


def _fmt(v: float) -> str:
    return str(int(v)) if float(v).is_integer() else repr(float(v))


@dataclass(frozen=True)
class PotentialSpec:
    family: Family
    a: float
    b: float
    c: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "family", Family(self.family))
        for name in ("a", "b", "c"):
            v = float(getattr(self, name))
            if not math.isfinite(v):
                raise ValueError(f"{name} must be finite")
            object.__setattr__(self, name, v)
        if self.b < 0:
            raise ValueError("b must be >= 0")
        if self.c < 0:
            raise ValueError("c must be >= 0")
        if self.family is Family.COSH_SECH and self.c != 0:
            raise ValueError("the cosh-sech family has no c parameter")

    @classmethod
    def coshsech(cls, a: float, b: float) -> "PotentialSpec":
        return cls(Family.COSH_SECH, a, b)

    @classmethod
    def modified(cls, a: float, b: float, c: float) -> "PotentialSpec":
        return cls(Family.MODIFIED, a, b, c)

    @classmethod
    def parse(cls, text: str) -> "PotentialSpec":
        """Parse ``coshsech(a=3,b=1)`` or ``modified(a=1,b=1,c=0.2)``."""
        m = re.fullmatch(r"\s*(\w+)\s*\((.*)\)\s*", text)
        if not m:
            raise SpecSyntaxError(f"expected family(key=value,...), got {text!r}")
        name = m.group(1).lower()
        try:
            family = Family(name)
        except ValueError:
            raise SpecSyntaxError(f"unknown potential family {name!r}") from None
        params: dict[str, float] = {}
        body = m.group(2).strip()
        for item in filter(None, (s.strip() for s in body.split(","))):
            key, sep, val = item.partition("=")
            key = key.strip()
            if not sep or key not in ("a", "b", "c"):
                raise SpecSyntaxError(f"bad parameter {item!r}")
            if key in params:
                raise SpecSyntaxError(f"duplicate parameter {key!r}")
            try:
                params[key] = float(val)
            except ValueError:
                raise SpecSyntaxError(f"bad value in {item!r}") from None
        required = {"a", "b"} | ({"c"} if family is Family.MODIFIED else set())
        missing = required - params.keys()
        if missing:
            raise SpecSyntaxError(f"missing parameter(s): {', '.join(sorted(missing))}")
        if family is Family.COSH_SECH and "c" in params:
            raise SpecSyntaxError("coshsech(...) takes only a and b")
        try:
            return cls(family, **params)
        except ValueError as exc:
            raise SpecSyntaxError(str(exc)) from None

    def __str__(self) -> str:
        if self.family is Family.COSH_SECH:
            return f"coshsech(a={_fmt(self.a)},b={_fmt(self.b)})"
        return f"modified(a={_fmt(self.a)},b={_fmt(self.b)},c={_fmt(self.c)})"

    def with_param(self, name: str, value: float) -> "PotentialSpec":
        return replace(self, **{name: value})


@dataclass(frozen=True)
class PotentialExtrema:
    x_max: Optional[float]
    v_max: Optional[float]
    v_origin: float
    v_min: float

    def to_dict(self) -> dict:
        return {"x_max": self.x_max, "v_max": self.v_max,
                "v_origin": self.v_origin, "v_min": self.v_min}


@dataclass(frozen=True)
class CoefficientPair:
    lambda0: Jet
    s0: Jet
    u0: float

    @property
    def order(self) -> int:
        return self.lambda0.order


def _log_cosh(x):
    ax = np.abs(x)
    return ax + np.log1p(np.exp(-2.0 * ax)) - math.log(2.0)


def v_eval(spec: PotentialSpec, x):
    """Potential at ``x`` (scalar or array)."""
    x_arr = np.asarray(x, dtype=float)
    t = np.exp(-2.0 * np.abs(x_arr))
    well = (spec.a ** 2 - 0.25) * 4.0 * t / (1.0 + t) ** 2   # sech^2 without overflow
    if spec.b == 0:
        outer = np.zeros_like(x_arr)
    else:
        log_term = 2.0 * _log_cosh(x_arr) - spec.c * x_arr ** 2
        if np.any(log_term > 700.0):
            raise PotentialOverflowError(
                f"cosh(x)**2 term overflows for {spec} at |x| = {np.max(np.abs(x_arr)):.4g}"
            )
        outer = (spec.b ** 2 / 4.0) * np.exp(log_term)
    v = -outer - well
    return float(v) if np.ndim(x) == 0 else v


def _analytic_extrema(a: float, b: float) -> PotentialExtrema:
    v_origin = -(a * a - 0.25) - b * b / 4.0
    disc = 4.0 * a * a - 1.0
    if b > 0 and disc > 0 and b < math.sqrt(disc):
        x_max = math.acosh((disc / (b * b)) ** 0.25)
        v_max = -(b / 2.0) * math.sqrt(disc)
    else:
        x_max = v_max = None
    return PotentialExtrema(x_max=x_max, v_max=v_max, v_origin=v_origin, v_min=v_origin)


def extrema(spec: PotentialSpec) -> PotentialExtrema:
    """Barrier top and central valley of the potential (numeric when ``c > 0``)."""
    if spec.family is Family.MODIFIED and spec.c > 0:
        return locate_extrema_numeric(spec)
    return _analytic_extrema(spec.a, spec.b)


def _golden_max(f, lo: float, hi: float, tol: float = 1e-12) -> float:
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    x1 = hi - invphi * (hi - lo)
    x2 = lo + invphi * (hi - lo)
    f1, f2 = f(x1), f(x2)
    while hi - lo > tol * max(1.0, abs(lo) + abs(hi)):
        if f1 < f2:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + invphi * (hi - lo)
            f2 = f(x2)
        else:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - invphi * (hi - lo)
            f1 = f(x1)
    return 0.5 * (lo + hi)


def _decay_cutoff(c: float) -> float:
    # exp(-c x^2) cosh^2 x peaks near x = 1/c; go until it is 1e-8 of that peak
    def g(x):
        return 2.0 * _log_cosh(x) - c * x * x

    x_peak = _golden_max(g, 0.0, 2.0 / c + 10.0, tol=1e-10)
    target = g(x_peak) - math.log(1e8)
    x = max(x_peak, 1.0)
    while g(x) > target:
        x *= 1.5
    return float(x)


def locate_extrema_numeric(spec: PotentialSpec) -> PotentialExtrema:
    """Extrema of the damped potential by grid bracketing plus golden-section refinement.

    ``x_max`` is the innermost interior local maximum (the barrier enclosing the
    central well), if the potential has one.
    """
    if spec.family is not Family.MODIFIED or spec.c <= 0:
        raise ValueError("numeric extrema are for the modified family with c > 0")
    v_origin = v_eval(spec, 0.0)
    x_cut = _decay_cutoff(spec.c)
    inner = np.linspace(0.0, min(10.0, x_cut), 4001)
    grid = inner if x_cut <= 10.0 else np.concatenate(
        [inner, np.geomspace(10.0, x_cut, 4001)[1:]])
    # for tiny c the damped term peaks beyond floating range; stay where V is finite
    finite = 2.0 * _log_cosh(grid) - spec.c * grid ** 2 <= 700.0
    if not finite.all():
        grid = grid[: int(np.argmin(finite))]
    v = v_eval(spec, grid)
    peaks = np.where((v[1:-1] > v[:-2]) & (v[1:-1] >= v[2:]))[0] + 1
    if len(peaks) == 0:
        return PotentialExtrema(x_max=None, v_max=None, v_origin=v_origin,
                                v_min=float(min(v.min(), v_origin)))
    i = peaks[0]
    x_max = _golden_max(lambda t: v_eval(spec, t), grid[i - 1], grid[i + 1])
    v_max = v_eval(spec, x_max)
    v_min = float(min(v[: i + 1].min(), v_origin))
    return PotentialExtrema(x_max=x_max, v_max=v_max, v_origin=v_origin, v_min=v_min)


def default_u0(spec: PotentialSpec) -> float:
    """``sinh(x_max)`` when the potential has a barrier top, otherwise 0 (the valley)."""
    ext = extrema(spec)
    return math.sinh(ext.x_max) if ext.x_max is not None else 0.0


def resolve_u0(spec: PotentialSpec, choice="valley") -> float:
    """Map a CLI-style choice (``valley``, ``max`` or a number) to an expansion point."""
    if isinstance(choice, str):
        key = choice.strip().lower()
        if key in ("valley", "min", "0"):
            return 0.0
        if key in ("max", "barrier"):
            return default_u0(spec)
        return float(key)
    return float(choice)


def init_coeffs(spec: PotentialSpec, u0: float, order: int,
                extended: bool = False) -> CoefficientPair:
    """Jets of lambda0(u) and s0(u) about ``u0``.

    lambda0 = 2 [i b + (a-1) u / (u^2+1)]
    s0      = [-2 i b (a-1) u - E + (a - a^2 - 1/4)] / (u^2+1) + tail
    tail    = 3 b^2 / 4                                  (cosh-sech)
            = (b^2/4) (2 + exp(-c asinh(u)^2))           (modified)
    """
    if order < 1:
        raise ValueError("order must be >= 1")
    num = mpmath.mpf if extended else float
    a, b, c = num(spec.a), num(spec.b), num(spec.c)
    quarter = num(1) / 4
    one = num(1)
    i = mpmath.mpc(0, 1) if extended else 1j
    u0 = float(u0)

    recip = ScalarJet.from_poly([1, 0, 1], u0, order, extended).reciprocal()
    u_recip = ScalarJet.identity(u0, order, extended) * recip

    lam = u_recip * (2 * (a - one)) + 2 * i * b
    s_free = u_recip * (-2 * i * b * (a - one)) + recip * (a - a * a - quarter)
    if spec.family is Family.MODIFIED and spec.c != 0:
        ash = scalar_jet_asinh(u0, order, extended)
        damp = scalar_jet_exp(ash * ash * (-c))
        s_free = s_free + (damp + 2) * (b * b * quarter)
    else:
        s_free = s_free + 3 * b * b * quarter

    s_data = np.empty((order + 1, 2), dtype=s_free.data.dtype)
    s_data[:, 0] = s_free.data
    s_data[:, 1] = -recip.data
    return CoefficientPair(lambda0=lam.lift(), s0=Jet(u0, s_data), u0=u0)


def oscillator_coeffs(u0: float, order: int, extended: bool = False) -> CoefficientPair:
    """AIM pair for ``-psi'' + u^2 psi = E psi`` with ``psi = exp(-u^2/2) y``.

    Then ``y'' = 2u y' + (1 - E) y``; the exact spectrum is ``E = 2n + 1``.
    """
    if order < 1:
        raise ValueError("order must be >= 1")
    lam = ScalarJet.identity(u0, order, extended) * 2
    s_data = np.empty((order + 1, 2), dtype=lam.data.dtype)
    s_data[:, 0] = ScalarJet.constant(1, u0, order, extended).data
    s_data[:, 1] = -ScalarJet.constant(1, u0, order, extended).data
    return CoefficientPair(lambda0=lam.lift(), s0=Jet(float(u0), s_data), u0=float(u0))
