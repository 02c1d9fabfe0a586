"""Classified spectra, degenerate pairs and parameter sweeps."""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

from .aim import EigenvalueCandidate, SolverConfig, SolverError, solve
from .potentials import (PotentialExtrema, PotentialSpec, extrema, init_coeffs,
                         resolve_u0)
from .series import SeriesError
from .units import UnitContext, classify_band, transition_wavelength

DEFAULT_PAIR_THRESHOLD = 0.1

Pair = tuple[float, float, float]


@dataclass
class SpectrumReport:
    spec: PotentialSpec
    config: dict
    bound_states: list[float]
    below_min_states: list[float]
    pairs: list[Pair]
    extrema: PotentialExtrema
    converged: dict[float, bool] = field(default_factory=dict)
    diagnostics: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "spec": str(self.spec),
            "config": self.config,
            "extrema": self.extrema.to_dict(),
            "bound_states": self.bound_states,
            "below_min_states": self.below_min_states,
            "pairs": [{"e_low": lo, "e_high": hi, "gap": gap} for lo, hi, gap in self.pairs],
            "states": [
                {"energy": e, "kind": kind, "converged": self.converged.get(e, False)}
                for kind, group in (("below_min", self.below_min_states),
                                    ("bound", self.bound_states))
                for e in group
            ],
            "diagnostics": self.diagnostics,
        }

    def state_rows(self) -> list[dict]:
        """One flat row per state, for CSV output."""
        paired = {e: i for i, (lo, hi, _) in enumerate(self.pairs) for e in (lo, hi)}
        rows = []
        for kind, group in (("below_min", self.below_min_states), ("bound", self.bound_states)):
            for e in group:
                rows.append({
                    "spec": str(self.spec), "energy": e, "kind": kind,
                    "converged": self.converged.get(e, False),
                    "pair": paired.get(e, ""),
                })
        return rows


def pair_degenerate(bound: Sequence[float], threshold: float = DEFAULT_PAIR_THRESHOLD
                    ) -> list[Pair]:
    """Greedy left-to-right pairing of adjacent energies closer than ``threshold``."""
    pairs: list[Pair] = []
    i = 0
    while i < len(bound) - 1:
        gap = bound[i + 1] - bound[i]
        if gap < threshold:
            pairs.append((bound[i], bound[i + 1], gap))
            i += 2
        else:
            i += 1
    return pairs


def classify(candidates: Sequence[EigenvalueCandidate], ext: PotentialExtrema,
             threshold: float = DEFAULT_PAIR_THRESHOLD, spec: Optional[PotentialSpec] = None,
             config: Optional[dict] = None) -> SpectrumReport:
    """Split candidates at V(0): below it they are not bound states.

    The boundary itself counts as bound.  Only bound states are paired.
    """
    energies = sorted(c.energy.real for c in candidates)
    conv = {c.energy.real: c.converged for c in candidates}
    bound = [e for e in energies if e >= ext.v_origin]
    below = [e for e in energies if e < ext.v_origin]
    return SpectrumReport(
        spec=spec, config=config or {}, bound_states=bound, below_min_states=below,
        pairs=pair_degenerate(bound, threshold), extrema=ext, converged=conv,
    )


def solver_config(spec: PotentialSpec, u0="valley", **kwargs) -> SolverConfig:
    return SolverConfig.for_spec(spec, u0=resolve_u0(spec, u0), **kwargs)


def solve_spectrum(spec: PotentialSpec, u0="valley", threshold: float = DEFAULT_PAIR_THRESHOLD,
                   **solver_kwargs) -> SpectrumReport:
    """Run the solver for one potential and classify the result."""
    cfg = solver_config(spec, u0, **solver_kwargs)
    base = init_coeffs(spec, cfg.u0, cfg.jet_order, extended=cfg.extended)
    result = solve(base, cfg)
    report = classify(result.candidates, extrema(spec), threshold, spec=spec,
                      config=cfg.to_dict())
    report.diagnostics.extend(result.diagnostics)
    return report


def transition_pair(bound: Sequence[float], v_max: Optional[float]) -> Optional[tuple[float, float]]:
    """(E1, E2): lowest state above the barrier top and highest state inside the well."""
    if v_max is None:
        return None
    above = [e for e in bound if e > v_max]
    inside = [e for e in bound if e <= v_max]
    if not above or not inside:
        return None
    return min(above), max(inside)


def straddling_pairs(bound: Sequence[float], v_max: Optional[float]
                     ) -> list[tuple[float, float]]:
    """Every (E_above, E_inside) with E_above > V_max >= E_inside.

    Nearly degenerate duplicates are collapsed first (one level per pair), and
    the result is ordered by increasing energy difference.
    """
    if v_max is None:
        return []
    levels: list[float] = []
    for e in sorted(bound):
        if levels and e - levels[-1] < 1e-2 * max(1.0, abs(e)):
            continue
        levels.append(e)
    above = [e for e in levels if e > v_max]
    inside = [e for e in levels if e <= v_max]
    out = [(hi, lo) for hi in above for lo in inside]
    return sorted(out, key=lambda p: p[0] - p[1])


@dataclass
class SweepRow:
    param: str
    value: float
    spec: str
    bound_states: list[float] = field(default_factory=list)
    pair_gaps: list[float] = field(default_factory=list)
    e_above: Optional[float] = None
    e_inside: Optional[float] = None
    wavelength_um: Optional[float] = None
    band: Optional[str] = None
    status: str = "ok"

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def _sweep_row(args) -> SweepRow:
    spec, param, value, u0, threshold, solver_kwargs, units = args
    s = spec.with_param(param, value)
    row = SweepRow(param=param, value=value, spec=str(s))
    try:
        rep = solve_spectrum(s, u0=u0, threshold=threshold, **solver_kwargs)
    except (SolverError, SeriesError, ValueError, ArithmeticError) as exc:
        row.status = f"error: {exc}"
        return row
    row.bound_states = rep.bound_states
    row.pair_gaps = [g for _, _, g in rep.pairs]
    if not rep.bound_states:
        row.status = "no bound states"
    if units is not None:
        tp = transition_pair(rep.bound_states, rep.extrema.v_max)
        if tp is None:
            if row.status == "ok":
                row.status = "no transition pair"
        else:
            row.e_above, row.e_inside = tp
            row.wavelength_um = transition_wavelength(tp[0] - tp[1], units)
            row.band = classify_band(row.wavelength_um)
    return row


def default_jobs() -> int:
    return max(1, int(os.environ.get("AIMVOLCANO_JOBS", "1")))


def sweep(base_spec: PotentialSpec, param: str, values: Sequence[float], *, u0="valley",
          threshold: float = DEFAULT_PAIR_THRESHOLD, units: Optional[UnitContext] = None,
          jobs: Optional[int] = None, **solver_kwargs) -> list[SweepRow]:
    """Solve and classify at every parameter value; rows come back in input order."""
    if param not in ("a", "b", "c"):
        raise ValueError(f"unknown sweep parameter {param!r}")
    if param == "c" and base_spec.family.value == "coshsech":
        raise ValueError("sweeping c needs the modified family")
    if any(not math.isfinite(v) for v in values):
        raise ValueError("sweep values must be finite")
    values = sorted(float(v) for v in values)
    tasks = [(base_spec, param, v, u0, threshold, solver_kwargs, units) for v in values]
    jobs = default_jobs() if jobs is None else jobs
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(_sweep_row, tasks))
    return [_sweep_row(t) for t in tasks]


@dataclass
class SplitRow:
    c: float
    delta_e: Optional[float]
    e_low: Optional[float]
    e_high: Optional[float]
    note: str = ""

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def _nearest_pair(energies: Sequence[float], center: float, threshold: float):
    near = sorted(energies, key=lambda e: abs(e - center))[:2]
    if len(near) < 2:
        return None
    lo, hi = sorted(near)
    if hi - lo >= threshold:
        return None
    return lo, hi


def splitting_curve(a: float = 1.0, b: float = 1.0, c_values: Sequence[float] = (),
                    *, target: float = -0.25, u0="valley",
                    threshold: float = DEFAULT_PAIR_THRESHOLD, k_max: int = 12,
                    **solver_kwargs) -> list[SplitRow]:
    """Gap of the near-degenerate pair closest to ``target`` as ``c`` varies.

    The pair is followed from row to row by its midpoint.  At ``c = 0`` the
    potential is unbounded and the pair is exactly degenerate, so the gap
    reported there is the method's numerical floor.
    """
    if not c_values:
        raise ValueError("empty c grid")
    if any(c < 0 or not math.isfinite(c) for c in c_values):
        raise ValueError("c values must be finite and >= 0")
    rows: list[SplitRow] = []
    center = target
    for c in sorted(c_values):
        spec = PotentialSpec.modified(a, b, c)
        try:
            cfg = solver_config(spec, u0, k_max=k_max, **solver_kwargs)
            res = solve(init_coeffs(spec, cfg.u0, cfg.jet_order, cfg.extended), cfg)
        except (SolverError, SeriesError, ValueError, ArithmeticError) as exc:
            rows.append(SplitRow(c, None, None, None, f"error: {exc}"))
            continue
        pair = _nearest_pair(res.energies(), center, threshold)
        note = "numerical floor" if c == 0 else ""
        if pair is None:
            rows.append(SplitRow(c, None, None, None, "pair lost"))
            continue
        lo, hi = pair
        center = 0.5 * (lo + hi)
        rows.append(SplitRow(c, hi - lo, lo, hi, note))
    return rows
