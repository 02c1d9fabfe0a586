"""Asymptotic iteration on coefficient jets and root tracking of the discriminant."""

from __future__ import annotations

import contextlib
import logging
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import mpmath
import numpy as np

from .potentials import CoefficientPair, PotentialSpec, extrema
from .series import EnergyPoly, Jet, is_extended, jet_derivative

log = logging.getLogger(__name__)


class SolverError(Exception):
    """Base class for solver failures."""


class DegenerateDiscriminantError(SolverError):
    """The discriminant vanished identically in E at the expansion point."""


class NoRootsError(SolverError):
    """A constant polynomial has no roots."""


@dataclass(frozen=True)
class AimIterate:
    """``lambda_k`` and ``s_k`` as jets.

    The stored jets equal the true ones times ``2**-log2_scale``; the common
    power-of-two factor is exact and leaves the discriminant roots unchanged.
    """

    k: int
    lambda_k: Jet
    s_k: Jet
    log2_scale: int = 0

    @property
    def order(self) -> int:
        return self.lambda_k.order

    @classmethod
    def initial(cls, base: CoefficientPair) -> "AimIterate":
        return cls(0, base.lambda0, base.s0)


@dataclass(frozen=True)
class SolverConfig:
    u0: float = 0.0
    k_max: int = 12
    jet_order: Optional[int] = None
    tol_converge: float = 1e-6
    tol_imag: float = 1e-4
    energy_window: tuple[float, float] = (-math.inf, math.inf)
    precision_mode: str = "double"
    extended_dps: int = 60

    def __post_init__(self):
        if self.k_max < 1:
            raise ValueError("k_max must be >= 1")
        if self.jet_order is None:
            object.__setattr__(self, "jet_order", self.k_max + 2)
        if self.jet_order < self.k_max + 2:
            raise ValueError(f"jet_order must be >= k_max + 2 = {self.k_max + 2}")
        if self.tol_converge <= 0 or self.tol_imag <= 0:
            raise ValueError("tolerances must be positive")
        lo, hi = self.energy_window
        if not lo < hi:
            raise ValueError("energy window must have lower < upper")
        object.__setattr__(self, "energy_window", (float(lo), float(hi)))
        if self.precision_mode not in ("double", "extended"):
            raise ValueError("precision_mode must be 'double' or 'extended'")

    @property
    def extended(self) -> bool:
        return self.precision_mode == "extended"

    @classmethod
    def for_spec(cls, spec: PotentialSpec, **kwargs) -> "SolverConfig":
        """Config whose default energy window brackets the spectrum of ``spec``."""
        if kwargs.get("energy_window") is None:
            ext = extrema(spec)
            top = ext.v_origin if ext.v_max is None else max(ext.v_origin, ext.v_max)
            kwargs["energy_window"] = (ext.v_origin - 20.0, top + 200.0)
        return cls(**kwargs)

    def to_dict(self) -> dict:
        return {
            "u0": self.u0, "k_max": self.k_max, "jet_order": self.jet_order,
            "tol_converge": self.tol_converge, "tol_imag": self.tol_imag,
            "energy_window": list(self.energy_window),
            "precision_mode": self.precision_mode,
            **({"extended_dps": self.extended_dps} if self.extended else {}),
        }


@dataclass(frozen=True)
class EigenvalueCandidate:
    energy: complex
    first_seen_k: int
    last_delta: float
    residual: float
    converged: bool
    history: tuple[tuple[int, complex], ...] = ()
    residual_history: tuple[tuple[int, float], ...] = ()

    def to_dict(self) -> dict:
        return {
            "energy": self.energy.real, "energy_imag": self.energy.imag,
            "first_seen_k": self.first_seen_k,
            "last_delta": None if math.isinf(self.last_delta) else self.last_delta,
            "residual": self.residual, "converged": self.converged,
        }


@dataclass
class SolveResult:
    candidates: list[EigenvalueCandidate]
    k_reached: int
    discriminant: Optional[EnergyPoly] = None
    roots_by_k: dict[int, list[complex]] = field(default_factory=dict)
    diagnostics: list[str] = field(default_factory=list)

    def __iter__(self):
        return iter(self.candidates)

    def __len__(self) -> int:
        return len(self.candidates)

    def energies(self, converged_only: bool = False) -> list[float]:
        return [c.energy.real for c in self.candidates if c.converged or not converged_only]


# ---------------------------------------------------------------------------


def aim_step(prev: AimIterate, base: CoefficientPair) -> AimIterate:
    """One AIM iteration.

    lambda_k = lambda_{k-1}' + s_{k-1} + lambda0 lambda_{k-1}
    s_k      = s_{k-1}'      + s0 lambda_{k-1}

    Each step consumes one jet order.
    """
    lam, s = prev.lambda_k, prev.s_k
    dlam = jet_derivative(lam)
    ds = jet_derivative(s)
    n = dlam.order
    lam_t = lam.truncate(n)
    lam_next = dlam + s.truncate(n) + base.lambda0.truncate(n) * lam_t
    s_next = ds + base.s0.truncate(n) * lam_t
    return AimIterate(prev.k + 1, lam_next, s_next, prev.log2_scale)


def rescale(it: AimIterate) -> AimIterate:
    """Divide both jets by a power of two near their largest coefficient."""
    big = max(_max_abs(it.lambda_k.data), _max_abs(it.s_k.data))
    if big == 0 or not math.isfinite(big):
        return it
    p = int(math.floor(math.log2(big)))
    if p == 0:
        return it
    f = 2.0 ** -p if not is_extended(it.lambda_k.data) else mpmath.ldexp(mpmath.mpf(1), -p)
    return AimIterate(it.k, it.lambda_k.scale(f), it.s_k.scale(f), it.log2_scale + p)


def _max_abs(arr: np.ndarray) -> float:
    if is_extended(arr):
        return float(max(abs(v) for v in arr.reshape(-1)))
    return float(np.abs(arr).max())


def discriminant(curr: AimIterate, prev: AimIterate) -> EnergyPoly:
    """``s_{k-1} lambda_k - s_k lambda_{k-1}`` at the expansion point, as a polynomial in E.

    Normalized so that its largest coefficient has modulus one.
    """
    if curr.k != prev.k + 1:
        raise ValueError(f"discriminant needs consecutive iterates, got k={prev.k} and {curr.k}")
    s_prev, l_prev = prev.s_k.coeffs[0], prev.lambda_k.coeffs[0]
    s_curr, l_curr = curr.s_k.coeffs[0], curr.lambda_k.coeffs[0]
    delta = s_prev * l_curr - s_curr * l_prev
    if delta.is_zero():
        raise DegenerateDiscriminantError(
            f"discriminant vanishes identically at k={curr.k}; try another expansion point"
        )
    return delta.normalized()


def relative_residual(p: EnergyPoly, e) -> float:
    """``|p(e)| / sum_j |c_j| |e|**j``: backward error of ``e`` as a root of ``p``."""
    num = abs(p(e))
    ae = abs(e)
    den = 0.0
    for c in p.coeffs[::-1]:
        den = den * ae + abs(c)
    return float(num / den) if den else float(num)


def _derivative_coeffs(c: np.ndarray) -> np.ndarray:
    return c[1:] * np.arange(1, len(c))


def _horner(c: Sequence, z):
    acc = 0 * z
    for v in c[::-1]:
        acc = acc * z + v
    return acc


def _newton_polish(c: np.ndarray, z, max_iter: int = 60):
    dc = _derivative_coeffs(c)
    fz = _horner(c, z)
    for _ in range(max_iter):
        d = _horner(dc, z)
        if d == 0:
            break
        z_new = z - fz / d
        f_new = _horner(c, z_new)
        if not abs(f_new) < abs(fz):
            break
        z, fz = z_new, f_new
        if fz == 0:
            break
    return z


def _aberth(c: np.ndarray, z: list, tol, max_iter: int = 60) -> list:
    """Simultaneous Aberth-Ehrlich refinement of all roots of ``c`` (low-to-high).

    A root stops moving once its relative correction drops below ``tol``.
    """
    dc = _derivative_coeffs(c)
    n = len(z)
    active = set(range(n))
    for _ in range(max_iter):
        if not active:
            break
        for i in sorted(active):
            zi = z[i]
            f = _horner(c, zi)
            if f == 0:
                active.discard(i)
                continue
            ratio = _horner(dc, zi) / f
            repulse = sum(1 / (zi - z[j]) for j in range(n) if j != i and z[j] != zi)
            w = ratio - repulse
            if w == 0:
                active.discard(i)
                continue
            step = 1 / w
            z[i] = zi - step
            if abs(step) <= tol * max(abs(zi), 1):
                active.discard(i)
    return z


def poly_roots(p: EnergyPoly) -> list[complex]:
    """All roots of ``p`` (with multiplicity), Newton-polished.

    Double mode: eigenvalues of the companion matrix.  Extended mode: the
    double-precision roots seed an Aberth-Ehrlich iteration carried out at
    the working mpmath precision.
    """
    c = p.coeffs
    if p.degree < 1:
        raise NoRootsError("a constant polynomial has no roots")
    if is_extended(c):
        seeds = np.roots(np.array([complex(v) for v in c[::-1]]))
        if len(seeds) < p.degree:  # leading coefficients underflowed in double
            seeds = np.concatenate([seeds, 1e3 * np.exp(2j * np.pi * np.arange(p.degree - len(seeds))
                                                        / (p.degree - len(seeds)) + 0.4j)])
        z = [mpmath.mpc(w) for w in seeds]
        tol = mpmath.mpf(10) ** (-(mpmath.mp.dps // 2))
        z = _aberth(c, z, tol)
        return [_newton_polish(c, w) for w in z]
    seeds = np.roots(c[::-1])
    return [complex(_newton_polish(c, complex(z))) for z in seeds]


def cluster_roots(roots: Sequence[complex], tol: float = 1e-8) -> list[tuple[complex, int]]:
    """Group roots closer than ``tol``; returns ``(mean, multiplicity)`` pairs."""
    groups: list[list[complex]] = []
    for z in sorted(roots, key=lambda w: (w.real, w.imag)):
        for g in groups:
            if abs(z - g[0]) <= tol:
                g.append(z)
                break
        else:
            groups.append([z])
    return [(sum(g) / len(g), len(g)) for g in groups]


@contextlib.contextmanager
def _precision(cfg: SolverConfig):
    if cfg.extended:
        with mpmath.workdps(cfg.extended_dps):
            yield
    else:
        yield


def _match(cands: list, roots: list[complex]) -> dict[int, int]:
    """Greedy nearest-neighbour assignment candidate index -> root index."""
    pairs = sorted(
        ((abs(r - c["energy"]), abs(r.imag), ci, ri)
         for ci, c in enumerate(cands) for ri, r in enumerate(roots)),
        key=lambda t: (t[0], t[1]),
    )
    used_c: set[int] = set()
    used_r: set[int] = set()
    out: dict[int, int] = {}
    for _, _, ci, ri in pairs:
        if ci in used_c or ri in used_r:
            continue
        out[ci] = ri
        used_c.add(ci)
        used_r.add(ri)
    return out


def solve(base: CoefficientPair, cfg: SolverConfig, keep_roots: bool = False) -> SolveResult:
    """Iterate to ``cfg.k_max`` tracking real roots of the discriminant inside the window.

    A candidate is converged once it has moved less than ``tol_converge``
    on two consecutive iterations.
    """
    if base.order < cfg.k_max + 1:
        raise ValueError(f"base jets of order {base.order} cannot support k_max={cfg.k_max}")
    lo, hi = cfg.energy_window
    tracked: list[dict] = []
    roots_by_k: dict[int, list[complex]] = {}
    diagnostics: list[str] = []
    delta: Optional[EnergyPoly] = None

    with _precision(cfg):
        prev = AimIterate.initial(base)
        for k in range(1, cfg.k_max + 1):
            curr = aim_step(prev, base)
            try:
                delta = discriminant(curr, prev)
            except DegenerateDiscriminantError as exc:
                diagnostics.append(str(exc))
                prev = rescale(curr)
                continue
            prev = rescale(curr)
            if delta.degree < 1:
                continue
            roots = poly_roots(delta)
            if keep_roots:
                roots_by_k[k] = [complex(r) for r in roots]
            kept = [r for r in roots if abs(r.imag) < cfg.tol_imag and lo <= r.real <= hi]
            assignment = _match(tracked, kept)
            new_tracked = []
            for ci, ri in assignment.items():
                c = tracked[ci]
                r = kept[ri]
                step = float(abs(r - c["energy"]))
                c["stable"] = c["stable"] + 1 if step < cfg.tol_converge else 0
                c["residual"] = relative_residual(delta, c["energy"])
                c["energy"] = r
                c["last_delta"] = step
                c["history"].append((k, complex(r)))
                c["res_hist"].append((k, c["residual"]))
                new_tracked.append(c)
            matched = set(assignment.values())
            for ri, r in enumerate(kept):
                if ri in matched:
                    continue
                res = relative_residual(delta, r)
                new_tracked.append({
                    "energy": r, "first_seen_k": k, "last_delta": math.inf,
                    "stable": 0, "residual": res,
                    "history": [(k, complex(r))], "res_hist": [(k, res)],
                })
            tracked = new_tracked

    candidates = sorted(
        (EigenvalueCandidate(
            energy=complex(c["energy"]), first_seen_k=c["first_seen_k"],
            last_delta=c["last_delta"], residual=float(c["residual"]),
            converged=c["stable"] >= 2, history=tuple(c["history"]),
            residual_history=tuple(c["res_hist"]),
        ) for c in tracked),
        key=lambda c: c.energy.real,
    )
    if not candidates:
        diagnostics.append(
            f"no real roots inside window [{lo:g}, {hi:g}] at k={cfg.k_max}; "
            "check the energy window, tol_imag or the expansion point"
        )
    return SolveResult(candidates=candidates, k_reached=cfg.k_max, discriminant=delta,
                       roots_by_k=roots_by_k, diagnostics=diagnostics)


def discriminants(base: CoefficientPair, k_max: int, extended_dps: Optional[int] = None
                  ) -> dict[int, EnergyPoly]:
    """Normalized discriminants for ``k = 1..k_max`` (no filtering or tracking)."""
    out: dict[int, EnergyPoly] = {}
    ctx = mpmath.workdps(extended_dps) if extended_dps else contextlib.nullcontext()
    with ctx:
        prev = AimIterate.initial(base)
        for k in range(1, k_max + 1):
            curr = aim_step(prev, base)
            out[k] = discriminant(curr, prev)
            prev = rescale(curr)
    return out


def pair_gap(roots: Sequence[complex], center: float) -> float:
    """Distance between the two roots nearest ``center`` in the complex plane."""
    near = sorted(roots, key=lambda z: abs(z - center))[:2]
    if len(near) < 2:
        return math.inf
    return float(abs(near[0] - near[1]))
