import math

import numpy as np
import pytest

from splitdirac.harness.cache import ReferenceCache
from splitdirac.harness.config import ExperimentPlan, GridSpec, PotentialSpec, TauRule
from splitdirac.harness.experiment import ConvergenceTable, observed_order, run_experiment
from splitdirac.harness.tables import (CSV_COLUMNS, emit, format_order, format_value, read_csv, to_csv,
                                       to_markdown)


def small_plan(**kw):
    base = dict(grid=GridSpec(-8.0, 8.0, 64), T=math.pi / 2, eps=(1.0, 0.5),
                tau_rule=TauRule("resonant", math.pi / 8, 2.0, 3), scheme="S1", lambda1=1.0, lambda2=0.5,
                potential=PotentialSpec("rational"), tau_e=math.pi / 2 * 1e-3,
                metrics=("h1", "density", "current", "energy"))
    base.update(kw)
    return ExperimentPlan(**base)


@pytest.fixture(scope="module")
def table(tmp_path_factory):
    return run_experiment(small_plan(), ReferenceCache(tmp_path_factory.mktemp("cache")))


# ---- formatting


@pytest.mark.parametrize("v,text", [(4.18237, "4.18"), (0.000709, "7.09E-4"), (11.7, "1.17E+1"), (0.0417, "4.17E-2"),
                                    (0.0, "0.00"), (math.nan, ""), (None, "")])
def test_format_value(v, text):
    assert format_value(v) == text


def test_format_order():
    assert format_order(None) == "--" and format_order(1.0149) == "1.01"


# ---- observed orders


def test_observed_order_examples():
    assert observed_order([1, 0.25], 4)[1] == pytest.approx(1.0)
    assert format_order(observed_order([1.69e-1, 4.17e-2], 4)[1]) == "1.01"
    assert format_order(observed_order([2.55e-1, 1.37e-2], 4)[1]) == "2.11"


def test_observed_order_absent_entries():
    assert observed_order([1.0, 0.0, 0.5, math.nan, 0.1], 2) == [None, None, None, None, None]
    assert observed_order([1.0, None, 0.25], 2) == [None, None, None]
    assert observed_order([], 4) == []


def test_observed_order_variable_ratios():
    got = observed_order([1.0, 0.5, 0.0625], [None, 2.0, 8.0])
    assert got[1] == pytest.approx(1.0) and got[2] == pytest.approx(1.0)


# ---- CSV


def test_empty_table_header_only_csv():
    t = ConvergenceTable(small_plan(), [], [], [])
    assert to_csv(t) == ",".join(CSV_COLUMNS) + "\n"
    assert read_csv(to_csv(t)) == ([], [])


def test_csv_round_trip(table):
    records, max_rows = read_csv(to_csv(table))
    assert len(records) == 6 and len(max_rows) == 3
    for got, want in zip(records + max_rows, table.records + table.max_rows):
        assert got.tau == want.tau
        assert (math.isnan(got.eps) and math.isnan(want.eps)) or got.eps == want.eps
        for attr in ("h1", "l1_density", "rel_l1_current", "rel_energy"):
            assert format_value(getattr(got, attr)) == format_value(getattr(want, attr))
        assert {k: format_order(v) for k, v in got.orders.items()} == \
               {k: format_order(v) for k, v in want.orders.items()}


def test_csv_rejects_foreign_header():
    with pytest.raises(ValueError):
        read_csv("a,b\n1,2\n")


def test_order_row_consistency(table):
    """Orders recomputed from the printed errors agree with the printed orders to print precision."""
    records, max_rows = read_csv(to_csv(table))
    rows = [[r for r in records if r.eps == e] for e in table.eps] + [max_rows]
    for row in rows:
        for metric, attr in (("h1", "h1"), ("density", "l1_density")):
            errs = [getattr(r, attr) for r in row]
            for k in range(1, len(row)):
                recomputed = math.log(errs[k - 1] / errs[k]) / math.log(2.0)
                # printed errors carry 3 significant digits: relative rounding 5e-3 each
                assert abs(recomputed - row[k].orders[metric]) <= 2 * 5e-3 / math.log(2.0) + 5e-3


def test_max_row_is_column_maximum(table):
    for j, tau in enumerate(table.taus):
        for metric in table.metrics:
            col = [table.values(metric, e)[j] for e in table.eps]
            assert table.values(metric)[j] == max(col)
        assert table.max_rows[j].tau == tau


def test_determinism(table, tmp_path):
    again = run_experiment(small_plan(), ReferenceCache(tmp_path))
    assert to_csv(again) == to_csv(table)


def test_markdown_layout(table):
    md = to_markdown(table)
    assert md.count("### ") == 4
    assert "| e^{eps,tau} | tau0 = 0.3927 | tau0/2 | tau0/2^2 |" in md
    assert "| eps0/2 |" in md and md.count("**max over 0<eps<=1**") == 4


def test_emit_writes_files(table, tmp_path):
    paths = emit(table, "csv", tmp_path / "out", "t")
    assert [p.name for p in paths] == ["t.csv", "t_diagnostics.csv"]
    assert paths[0].read_text() == to_csv(table)
    diag = paths[1].read_text().splitlines()
    assert diag[0] == "eps,tau,steps,non_resonant,abs_energy,mass_drift,status" and len(diag) == 7
    assert emit(table, "markdown", tmp_path / "out", "t")[0].suffix == ".md"
    with pytest.raises(ValueError):
        emit(table, "html", tmp_path)


def test_emit_unwritable_path(table, tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("")
    with pytest.raises(OSError):
        emit(table, "csv", blocker / "sub")


# ---- experiment behaviour


def test_self_comparison_is_exact(tmp_path):
    """A cell run with tau = tau_e reproduces the reference."""
    tau_e = math.pi / 2 * 1e-3
    plan = small_plan(eps=(1.0,), tau_rule=TauRule("list", taus=(tau_e,)), scheme="S2", tau_e=tau_e)
    t = run_experiment(plan, ReferenceCache(tmp_path))
    r = t.records[0]
    assert max(r.h1, r.l1_density, r.rel_l1_current, r.rel_energy) <= 1e-10


def test_cell_failures_are_recorded(tmp_path, monkeypatch):
    import splitdirac.harness.experiment as ex
    real = ex.evolve

    def flaky(run, *a, **k):
        if run.tau == math.pi / 16 and run.params.eps == 0.5:
            raise ex.obs.EnergyResidualError("boom")
        return real(run, *a, **k)

    monkeypatch.setattr(ex, "evolve", flaky)
    t = run_experiment(small_plan(), ReferenceCache(tmp_path))
    failed = [r for r in t.records if r.failure]
    assert len(failed) == 1 and "boom" in failed[0].failure
    assert t.max_rows[1].failure and not t.max_rows[0].failure
    assert "FAIL" in to_csv(t) and "FAIL" in to_markdown(t)
    assert t.row(0.5)[2].orders["h1"] is None


def test_reference_failure_marks_whole_row(tmp_path, monkeypatch):
    import splitdirac.harness.experiment as ex

    def broken(plan, eps, cache):
        if eps == 0.5:
            raise RuntimeError("no reference")
        return real(plan, eps, cache)

    real = ex.plan_reference
    monkeypatch.setattr(ex, "plan_reference", broken)
    t = run_experiment(small_plan(), ReferenceCache(tmp_path))
    assert all(r.failure for r in t.row(0.5)) and not any(r.failure for r in t.row(1.0))


def test_parallel_matches_serial(table, tmp_path):
    par = run_experiment(small_plan(), ReferenceCache(tmp_path), jobs=2)
    assert to_csv(par) == to_csv(table)
    assert np.all([d.status == "ok" for d in par.diagnostics])
