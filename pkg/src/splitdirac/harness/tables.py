"""CSV / Markdown emitters for convergence tables.

Values use three significant digits in the style ``4.18``, ``7.09E-4``,
``1.17E+1``; orders use two decimals and ``--`` when absent. Max-over-eps
footer rows carry ``max`` in the eps column.
"""
from __future__ import annotations

import csv
import io
import math
from pathlib import Path

from ..observables import ErrorRecord
from .experiment import METRIC_FIELDS, ConvergenceTable

CSV_COLUMNS = ["eps", "tau", "h1", "order_h1", "l1_density", "order_density",
               "rel_l1_current", "order_current", "rel_energy", "order_energy"]
DIAG_COLUMNS = ["eps", "tau", "steps", "non_resonant", "abs_energy", "mass_drift", "status"]
FAIL = "FAIL"
MAX_LABEL = "max"

_ORDER_COLUMN = {"h1": "order_h1", "density": "order_density", "current": "order_current", "energy": "order_energy"}
_TITLES = {"h1": "e^{eps,tau}", "density": "e_rho^{eps,tau}", "current": "e_J^{eps,tau}", "energy": "e_E^{eps,tau}"}


def format_value(v: float | None) -> str:
    if v is None or (isinstance(v, float) and math.isnan(v)):
        return ""
    if v == 0:
        return "0.00"
    mant, exp = f"{v:.2E}".split("E")
    exp = int(exp)
    return mant if exp == 0 else f"{mant}E{exp:+d}"


def format_order(o: float | None) -> str:
    return "--" if o is None else f"{o:.2f}"


def _parse_value(s: str) -> float:
    return math.nan if s in ("", FAIL) else float(s)


def _parse_order(s: str) -> float | None:
    return None if s in ("--", "", FAIL) else float(s)


def _row_cells(rec: ErrorRecord, metrics, eps_label: str) -> list[str]:
    cells = [eps_label, repr(rec.tau)]
    for metric in ("h1", "density", "current", "energy"):
        if metric not in metrics:
            cells += ["", ""]
        elif rec.failure:
            cells += [FAIL, FAIL]
        else:
            cells += [format_value(getattr(rec, METRIC_FIELDS[metric])), format_order(rec.orders.get(metric))]
    return cells


def to_csv(table: ConvergenceTable) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for rec in table.records:
        w.writerow(_row_cells(rec, table.metrics, repr(rec.eps)))
    for rec in table.max_rows:
        w.writerow(_row_cells(rec, table.metrics, MAX_LABEL))
    return buf.getvalue()


def diagnostics_csv(table: ConvergenceTable) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(DIAG_COLUMNS)
    abs_e = {(r.eps, r.tau): r.abs_energy for r in table.records}
    for d in table.diagnostics:
        w.writerow([repr(d.eps), repr(d.tau), d.steps, "" if d.non_resonant is None else int(d.non_resonant),
                    format_value(abs_e.get((d.eps, d.tau))), f"{d.mass_drift:.2e}", d.status])
    return buf.getvalue()


def read_csv(text: str) -> tuple[list[ErrorRecord], list[ErrorRecord]]:
    """Parse :func:`to_csv` output back into (records, max_rows)."""
    reader = csv.DictReader(io.StringIO(text))
    if reader.fieldnames != CSV_COLUMNS:
        raise ValueError(f"unexpected CSV header {reader.fieldnames}")
    records, max_rows = [], []
    for row in reader:
        is_max = row["eps"] == MAX_LABEL
        rec = ErrorRecord(math.nan if is_max else float(row["eps"]), float(row["tau"]))
        for metric, attr in METRIC_FIELDS.items():
            cell = row[attr]
            if cell == FAIL:
                rec.failure = FAIL
            setattr(rec, attr, _parse_value(cell))
            if cell != "":
                rec.orders[metric] = _parse_order(row[_ORDER_COLUMN[metric]])
        (max_rows if is_max else records).append(rec)
    return records, max_rows


def _eps_label(eps: float, eps0: float) -> str:
    k = math.log2(eps0 / eps) if eps > 0 else math.nan
    if k == 0:
        return "eps0"
    if abs(k - round(k)) < 1e-12:
        return "eps0/2" if round(k) == 1 else f"eps0/2^{round(k)}"
    return f"{eps:g}"


def _tau_label(k: int, tau0: float, ratio: float) -> str:
    if k == 0:
        return f"tau0 = {tau0:.4g}"
    r = f"{ratio:g}"
    return f"tau0/{r}" if k == 1 else f"tau0/{r}^{k}"


def to_markdown(table: ConvergenceTable) -> str:
    """One table per metric: value and order rows per eps, then the max-over-eps footer."""
    eps0 = max(table.eps) if table.eps else 1.0
    taus = table.taus
    ratio = taus[0] / taus[1] if len(taus) > 1 else 1.0
    uniform = all(math.isclose(taus[k - 1] / taus[k], ratio, rel_tol=1e-9) for k in range(1, len(taus)))
    heads = [_tau_label(k, taus[0], ratio) if uniform else f"{t:.4g}" for k, t in enumerate(taus)]
    out = []
    for metric in table.metrics:
        attr = METRIC_FIELDS[metric]
        out.append(f"### {_TITLES[metric]}(t = {table.plan.T:.4g}), {table.plan.scheme}\n")
        out.append("| " + " | ".join([_TITLES[metric], *heads]) + " |")
        out.append("|" + "---|" * (len(heads) + 1))

        def emit_rows(label, recs):
            vals = [FAIL if r.failure else format_value(getattr(r, attr)) for r in recs]
            ords = [FAIL if r.failure else format_order(r.orders.get(metric)) for r in recs]
            out.append("| " + " | ".join([label, *vals]) + " |")
            out.append("| " + " | ".join(["order", *ords]) + " |")

        for e in table.eps:
            emit_rows(_eps_label(e, eps0), table.row(e))
        emit_rows("**max over 0<eps<=1**", table.max_rows)
        out.append("")
    return "\n".join(out)


def emit(table: ConvergenceTable, fmt: str = "csv", out_dir: str | Path = "out", name: str = "table") -> list[Path]:
    """Write the table (and a diagnostics CSV) under ``out_dir``; returns written paths."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    if fmt == "csv":
        main = out_dir / f"{name}.csv"
        main.write_text(to_csv(table))
    elif fmt == "markdown":
        main = out_dir / f"{name}.md"
        main.write_text(to_markdown(table))
    else:
        raise ValueError(f"unknown format {fmt!r}")
    diag = out_dir / f"{name}_diagnostics.csv"
    diag.write_text(diagnostics_csv(table))
    return [main, diag]
