"""Finite-difference check of AIM energies.

Discretizes ``-psi'' + V psi = E psi`` on ``[-L, L]`` with hard walls and a
3-point Laplacian.  For the damped family (``c > 0``) the potential decays to
zero and the truncation is honest.  For the unbounded cosh-sech family the
box walls cut off a potential that keeps plunging, so the box spectrum is full
of wall-localized states; there the comparison is advisory and each FD value
is tagged with its sensitivity to moving the walls.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence, Union

import numpy as np
from scipy.linalg import eigh_tridiagonal

from .potentials import Family, PotentialOverflowError, PotentialSpec, v_eval
from .spectrum import solve_spectrum


class OracleInapplicableError(ValueError):
    """The potential cannot be represented on the requested grid."""


@dataclass(frozen=True)
class FdGrid:
    half_width: float = 12.0
    points: int = 4000

    def __post_init__(self):
        if self.half_width <= 0:
            raise ValueError("half width must be positive")
        if self.points < 3:
            raise ValueError("need at least 3 interior points")

    @property
    def spacing(self) -> float:
        return 2.0 * self.half_width / (self.points + 1)

    @property
    def x(self) -> np.ndarray:
        return -self.half_width + self.spacing * np.arange(1, self.points + 1)

    def widened(self, factor: float = 1.25) -> "FdGrid":
        """Same spacing, walls moved out by ``factor``."""
        n = int(round(factor * (self.points + 1))) - 1
        return FdGrid(self.half_width * (n + 1) / (self.points + 1), n)

    def refined(self) -> "FdGrid":
        return FdGrid(self.half_width, 2 * self.points + 1)


@dataclass(frozen=True)
class TridiagonalOperator:
    diagonal: np.ndarray
    off_diagonal: np.ndarray

    def __post_init__(self):
        if len(self.off_diagonal) != len(self.diagonal) - 1:
            raise ValueError("off-diagonal must have N-1 entries")

    @property
    def size(self) -> int:
        return len(self.diagonal)


Potential = Union[PotentialSpec, Callable[[np.ndarray], np.ndarray]]


def build_hamiltonian(potential: Potential, grid: FdGrid) -> TridiagonalOperator:
    x = grid.x
    try:
        v = v_eval(potential, x) if isinstance(potential, PotentialSpec) else potential(x)
    except PotentialOverflowError as exc:
        raise OracleInapplicableError(str(exc)) from exc
    v = np.broadcast_to(np.asarray(v, dtype=float), x.shape)
    if not np.all(np.isfinite(v)):
        raise OracleInapplicableError("potential is not finite on the grid")
    h2 = grid.spacing ** 2
    return TridiagonalOperator(2.0 / h2 + v, np.full(grid.points - 1, -1.0 / h2))


def sturm_count(op: TridiagonalOperator, t: float) -> int:
    """Number of eigenvalues strictly below ``t`` (negative pivots of ``T - t I``)."""
    d = op.diagonal
    e2 = op.off_diagonal ** 2
    tiny = np.finfo(float).tiny
    count = 0
    q = d[0] - t
    if q < 0:
        count += 1
    for i in range(1, len(d)):
        if q == 0:
            q = tiny
        q = d[i] - t - e2[i - 1] / q
        if q < 0:
            count += 1
    return count


def lowest_eigenvalues(op: TridiagonalOperator, m: int) -> np.ndarray:
    """The ``m`` smallest eigenvalues by Sturm-sequence bisection (LAPACK stebz)."""
    if not 1 <= m <= op.size:
        raise ValueError(f"m must be in [1, {op.size}]")
    return eigh_tridiagonal(op.diagonal, op.off_diagonal, eigvals_only=True,
                            select="i", select_range=(0, m - 1),
                            lapack_driver="stebz", tol=1e-12)


def eigenvalues_in(op: TridiagonalOperator, lo: float, hi: float) -> np.ndarray:
    return eigh_tridiagonal(op.diagonal, op.off_diagonal, eigvals_only=True,
                            select="v", select_range=(lo, hi), lapack_driver="stebz",
                            tol=1e-12)


@dataclass
class OracleRow:
    aim: float
    fd: Optional[float]
    abs_dev: Optional[float]
    rel_dev: Optional[float]
    wall_shift: Optional[float]
    grid_shift: Optional[float]
    trusted: bool

    def to_dict(self) -> dict:
        return dict(self.__dict__)


@dataclass
class OracleReport:
    spec: PotentialSpec
    mode: str
    grid: FdGrid
    rows: list[OracleRow]
    fd_eigenvalues: list[float]
    stability_tol: float
    fd_lowest_trusted: Optional[float] = None
    notes: list[str] = field(default_factory=list)

    @property
    def aim_lowest(self) -> Optional[float]:
        return self.rows[0].aim if self.rows else None

    @property
    def lowest_rel_dev(self) -> Optional[float]:
        """Relative gap between the lowest AIM bound state and the lowest stable FD level."""
        if self.aim_lowest is None or self.fd_lowest_trusted is None:
            return None
        return abs(self.aim_lowest - self.fd_lowest_trusted) / abs(self.fd_lowest_trusted)

    def to_dict(self) -> dict:
        return {
            "spec": str(self.spec), "mode": self.mode,
            "grid": {"half_width": self.grid.half_width, "points": self.grid.points,
                     "spacing": self.grid.spacing},
            "stability_tol": self.stability_tol,
            "lowest": {"aim": self.aim_lowest, "fd": self.fd_lowest_trusted,
                       "rel_dev": self.lowest_rel_dev},
            "fd_eigenvalues": self.fd_eigenvalues,
            "rows": [r.to_dict() for r in self.rows],
            "notes": self.notes,
        }

    def table(self) -> str:
        head = f"{'AIM':>14} {'FD':>14} {'abs dev':>10} {'rel dev':>10} {'wall shift':>11} trusted"
        lines = [head, "-" * len(head)]
        for r in self.rows:
            def f(v, w, p):
                return f"{v:{w}.{p}g}" if v is not None else " " * (w - 1) + "-"
            lines.append(f"{r.aim:14.8f} {f(r.fd, 14, 10)} {f(r.abs_dev, 10, 3)} "
                         f"{f(r.rel_dev, 10, 3)} {f(r.wall_shift, 11, 3)} {'yes' if r.trusted else 'no'}")
        rel = self.lowest_rel_dev
        lines.append(f"lowest: AIM {self.aim_lowest}  FD {self.fd_lowest_trusted}  "
                     f"rel dev {rel:.3g}" if rel is not None else "lowest: no comparison")
        return "\n".join(lines)


def _nearest(values: Sequence[float], target: float) -> Optional[float]:
    if len(values) == 0:
        return None
    return float(min(values, key=lambda v: abs(v - target)))


def oracle_mode(spec: PotentialSpec) -> str:
    return "validated" if spec.family is Family.MODIFIED and spec.c > 0 else "advisory"


def cross_validate(spec: PotentialSpec, grid: FdGrid = FdGrid(), m: int = 12,
                   stability_tol: float = 1e-4, aim_energies: Optional[Sequence[float]] = None,
                   **solver_kwargs) -> OracleReport:
    """Pair every AIM bound state with the nearest FD eigenvalue.

    An FD value is trusted only if it moves by at most ``stability_tol`` when
    the walls are pushed out to ``1.25 L`` and by at most ``10 * stability_tol``
    when the grid is refined.
    """
    mode = oracle_mode(spec)
    if aim_energies is None:
        aim_energies = solve_spectrum(spec, **solver_kwargs).bound_states
    aim_energies = sorted(aim_energies)
    op = build_hamiltonian(spec, grid)
    op_wide = build_hamiltonian(spec, grid.widened())
    op_fine = build_hamiltonian(spec, grid.refined())
    notes: list[str] = []
    if mode == "validated":
        fd = lowest_eigenvalues(op, min(m, op.size))
        fd_wide = lowest_eigenvalues(op_wide, min(m + 4, op_wide.size))
        fd_fine = lowest_eigenvalues(op_fine, min(m + 4, op_fine.size))
    else:
        notes.append("advisory: the potential is unbounded below; hard walls produce "
                     "wall-localized states and agreement is not expected in general")
        if not aim_energies:
            fd = fd_wide = fd_fine = np.array([])
        else:
            lo, hi = aim_energies[0] - 1.0, aim_energies[-1] + 1.0
            fd = eigenvalues_in(op, lo, hi)
            fd_wide = eigenvalues_in(op_wide, lo - 1.0, hi + 1.0)
            fd_fine = eigenvalues_in(op_fine, lo - 1.0, hi + 1.0)
    fd_lowest = None
    for v in fd:
        wide, fine = _nearest(fd_wide, v), _nearest(fd_fine, v)
        if (wide is not None and fine is not None and abs(wide - v) <= stability_tol
                and abs(fine - v) <= 10 * stability_tol):
            fd_lowest = float(v)
            break
    rows = []
    for e in aim_energies:
        near = _nearest(fd, e)
        if near is None:
            rows.append(OracleRow(e, None, None, None, None, None, False))
            continue
        wide = _nearest(fd_wide, near)
        fine = _nearest(fd_fine, near)
        wall_shift = abs(wide - near) if wide is not None else math.inf
        grid_shift = abs(fine - near) if fine is not None else math.inf
        trusted = wall_shift <= stability_tol and grid_shift <= 10 * stability_tol
        abs_dev = abs(e - near)
        rel_dev = abs_dev / abs(near) if near != 0 else math.inf
        rows.append(OracleRow(e, near, abs_dev, rel_dev, wall_shift, grid_shift, trusted))
    excluded = [r.aim for r in rows if not r.trusted]
    if excluded:
        notes.append(f"{len(excluded)} AIM state(s) have no truncation-stable FD partner")
    return OracleReport(spec=spec, mode=mode, grid=grid, rows=rows,
                        fd_eigenvalues=[float(v) for v in fd], stability_tol=stability_tol,
                        fd_lowest_trusted=fd_lowest, notes=notes)
