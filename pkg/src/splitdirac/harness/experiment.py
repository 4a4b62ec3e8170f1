"""Convergence sweeps: reference solutions, per-cell errors, observed orders, max-over-eps rows."""
from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .. import observables as obs
from ..resonance import ResonanceSpec, is_non_resonant
from ..schemes import PhysicsParams, SchemeRun, evolve
from ..spectral import Grid, SpinorField
from .cache import ReferenceCache, reference_key
from .config import ExperimentPlan, initial_field, steps_for

log = logging.getLogger(__name__)

# metric name -> ErrorRecord attribute
METRIC_FIELDS = {"h1": "h1", "density": "l1_density", "current": "rel_l1_current", "energy": "rel_energy"}


def observed_order(errors, ratio) -> list[float | None]:
    """log(e_{k-1}/e_k)/log(ratio_k); the first entry and any entry touching a
    non-positive or missing error are None."""
    errors = list(errors)
    # ratios[k] relates errors[k-1] to errors[k]; ratios[0] is unused
    ratios = [ratio] * len(errors) if np.isscalar(ratio) else list(ratio)
    out: list[float | None] = [None] if errors else []
    for k in range(1, len(errors)):
        a, b, r = errors[k - 1], errors[k], ratios[k]
        if a is None or b is None or not (0 < a < math.inf and 0 < b < math.inf) or not r > 1:
            out.append(None)
        else:
            out.append(math.log(a / b) / math.log(r))
    return out


def compute_reference(grid: Grid, T: float, params: PhysicsParams, initial: SpinorField,
                      tau_e: float, cache: ReferenceCache | None = None, scheme: str = "S2") -> SpinorField:
    """Fine-step solution at time T, loaded from ``cache`` when present."""
    steps = steps_for(T, tau_e)

    def compute():
        log.info("computing reference eps=%g tau_e=%g (%d %s steps)", params.eps, tau_e, steps, scheme)
        return evolve(SchemeRun(scheme, tau_e, steps, params, initial)).field

    if cache is None:
        return compute()
    key = reference_key(grid, T, params.eps, params.lambda1, params.lambda2,
                        params.potential_on(grid), initial.values, scheme, tau_e)
    header = {"T": T, "eps": params.eps, "lambda1": params.lambda1, "lambda2": params.lambda2,
              "scheme": scheme, "tau_e": tau_e, "steps": steps}
    return cache.get_or_compute(key, compute, header)


def plan_reference(plan: ExperimentPlan, eps: float, cache: ReferenceCache | None) -> SpinorField:
    grid = plan.grid.build()
    return compute_reference(grid, plan.T, plan.physics(eps, grid), initial_field(plan.initial, grid),
                             plan.tau_e, cache, plan.reference_scheme)


@dataclass
class CellDiagnostics:
    eps: float
    tau: float
    steps: int = 0
    non_resonant: bool | None = None
    mass_drift: float = math.nan
    status: str = "ok"


@dataclass
class ConvergenceTable:
    plan: ExperimentPlan
    eps: list[float]
    taus: list[float]
    records: list[obs.ErrorRecord]
    max_rows: list[obs.ErrorRecord] = field(default_factory=list)
    diagnostics: list[CellDiagnostics] = field(default_factory=list)

    @property
    def metrics(self) -> tuple[str, ...]:
        return self.plan.metrics

    def row(self, eps: float) -> list[obs.ErrorRecord]:
        return [r for r in self.records if r.eps == eps]

    def values(self, metric: str, eps: float | None = None) -> list[float]:
        """Errors for one metric across the tau columns; eps=None gives the max row."""
        attr = METRIC_FIELDS[metric]
        recs = self.max_row_records() if eps is None else self.row(eps)
        return [getattr(r, attr) for r in recs]

    def max_row_records(self) -> list[obs.ErrorRecord]:
        return list(self.max_rows)

    def orders(self, metric: str, eps: float | None = None) -> list[float | None]:
        recs = self.max_row_records() if eps is None else self.row(eps)
        return [r.orders.get(metric) for r in recs]


def _cell(plan: ExperimentPlan, eps: float, tau: float, ref) -> tuple[obs.ErrorRecord, CellDiagnostics]:
    rec = obs.ErrorRecord(eps, tau)
    diag = CellDiagnostics(eps, tau)
    try:
        if isinstance(ref, BaseException):
            raise ref
        grid = plan.grid.build()
        params = plan.physics(eps, grid)
        init = initial_field(plan.initial, grid)
        steps = steps_for(plan.T, tau)
        diag.steps = steps
        diag.non_resonant = is_non_resonant(tau, ResonanceSpec(eps, plan.tau_rule.delta))
        res = evolve(SchemeRun(plan.scheme, tau, steps, params, init))
        diag.mass_drift = res.max_mass_drift
        num = res.field
        if "h1" in plan.metrics:
            rec.h1 = obs.h1_error(num, ref, plan.zero_nyquist)
        if "density" in plan.metrics:
            rec.l1_density = obs.density_error_l1(num, ref)
        if "current" in plan.metrics:
            rec.rel_l1_current = obs.current_error_rel_l1(num, ref, eps)
        if "energy" in plan.metrics:
            rec.abs_energy = obs.energy_error_abs(num, ref, params)
            rec.rel_energy = obs.energy_error_rel(num, ref, params)
    except Exception as exc:  # recorded per cell; the table is still emitted
        log.error("cell eps=%g tau=%g failed: %s", eps, tau, exc)
        rec.failure = f"{type(exc).__name__}: {exc}"
        diag.status = "failed"
    return rec, diag


def _reference_job(plan: ExperimentPlan, eps: float, cache: ReferenceCache | None):
    try:
        return plan_reference(plan, eps, cache)
    except Exception as exc:
        log.error("reference eps=%g failed: %s", eps, exc)
        return exc


def run_experiment(plan: ExperimentPlan, cache: ReferenceCache | None = None, jobs: int = 1) -> ConvergenceTable:
    """Evaluate every (eps, tau) cell of ``plan`` against its reference solution.

    References are computed (or loaded) once per eps, then the cells run
    independently, on a process pool when ``jobs > 1``.
    """
    taus = plan.taus
    cells = [(e, t) for e in plan.eps for t in taus]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            refs = dict(zip(plan.eps, pool.map(_reference_job, *zip(*[(plan, e, cache) for e in plan.eps]))))
            results = list(pool.map(_cell, *zip(*[(plan, e, t, refs[e]) for e, t in cells])))
    else:
        refs = {e: _reference_job(plan, e, cache) for e in plan.eps}
        results = [_cell(plan, e, t, refs[e]) for e, t in cells]
    records = [r for r, _ in results]
    diags = [d for _, d in results]

    ratios = [None] + [taus[k - 1] / taus[k] for k in range(1, len(taus))]
    for e in plan.eps:
        row = [r for r in records if r.eps == e]
        _attach_orders(row, plan.metrics, ratios)
    max_rows = []
    for j, t in enumerate(taus):
        col = [records[i * len(taus) + j] for i in range(len(plan.eps))]
        m = obs.ErrorRecord(math.nan, t)
        for metric in plan.metrics:
            attr = METRIC_FIELDS[metric]
            vals = [getattr(r, attr) for r in col if r.failure is None]
            setattr(m, attr, max(vals) if vals else math.nan)
        if any(r.failure for r in col):
            m.failure = "incomplete column"
        max_rows.append(m)
    _attach_orders(max_rows, plan.metrics, ratios)
    return ConvergenceTable(plan, list(plan.eps), taus, records, max_rows, diags)


def _attach_orders(row: list[obs.ErrorRecord], metrics, ratios):
    for metric in metrics:
        attr = METRIC_FIELDS[metric]
        errs = [None if r.failure else getattr(r, attr) for r in row]
        for r, o in zip(row, observed_order(errs, ratios)):
            r.orders[metric] = o
