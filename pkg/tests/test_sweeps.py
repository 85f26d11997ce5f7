import csv
import io
import math

import pytest

from cvtp.sweeps import (
    HEADER,
    PRESETS,
    SweepRow,
    SweepSpec,
    evaluate_point,
    format_complex,
    r_range,
    rows_to_csv,
    run_sweep,
    write_csv,
)
from cvtp import Gaussian, RealLine


def _parse(text):
    return list(csv.reader(io.StringIO(text)))


def test_r_range_is_exact():
    grid = r_range(0, 2, 0.1)
    assert len(grid) == 21 and grid[3] == 0.3 and grid[-1] == 2.0


@pytest.mark.parametrize("kwargs", [
    dict(family="real", r_grid=(), secondary_grid=(1.0,)),
    dict(family="real", r_grid=(0.1, 0.1), secondary_grid=(1.0,)),
    dict(family="real", r_grid=(0.2, 0.1), secondary_grid=(1.0,)),
    dict(family="real", r_grid=(0.1,), secondary_grid=(1.0,), secondary_kind="lambda"),
    dict(family="cube", r_grid=(0.1,), secondary_grid=(1.0,)),
    dict(family="real", r_grid=(-0.1,), secondary_grid=(1.0,)),
    dict(family="real", r_grid=(0.1,), secondary_grid=(1.0,), objective="magic"),
])
def test_spec_validation(kwargs):
    with pytest.raises(ValueError):
        SweepSpec(**kwargs)


def test_row_order_secondary_outer():
    spec = SweepSpec("circle", (0.0, 0.5), (1.0, 2.0))
    pts = [(d.R, r) for d, r in spec.points()]
    assert pts == [(1.0, 0.0), (1.0, 0.5), (2.0, 0.0), (2.0, 0.5)]


def test_gaussian_secondary_kinds():
    by_arg = SweepSpec("gaussian", (0.2,), (0.0, math.pi / 2), "beta_arg", {"lam": 2.0, "beta_abs": 1.5})
    d = by_arg.distribution(math.pi / 2)
    assert d.lam == 2.0 and complex(d.beta) == pytest.approx(1.5j)
    by_abs = SweepSpec("gaussian", (0.2,), (1.0, 2.0), "beta_abs", {"lam": 0.5, "beta_arg": 0.0})
    assert complex(by_abs.distribution(2.0).beta) == 2.0
    by_lam = SweepSpec("gaussian", (0.2,), (0.5, 1.0), "lambda", {"beta_re": 1.0})
    assert by_lam.distribution(1.0).lam == 1.0


def test_csv_format_and_dominance():
    rows = run_sweep(SweepSpec("real", (0.0, 0.3), (1.0, 5.0)))
    text = rows_to_csv(rows)
    assert "\r" not in text and text.endswith("\n")
    table = _parse(text)
    assert tuple(table[0]) == HEADER
    assert len(table) == 5
    for row in table[1:]:
        assert row[0] == "real" and row[2] == ""
        f_opt, f_one, f_orig = (float(row[k]) for k in (7, 8, 9))
        assert f_opt >= f_one - 1e-9 and f_one >= f_orig - 1e-9
        assert row[-1] == "true"
    # full round-trip precision
    assert float(table[1][7]) == rows[0].F_opt


def test_gaussian_param_encoding_round_trips():
    z = complex(1.5 * math.cos(0.3), 1.5 * math.sin(0.3))
    assert complex(format_complex(z)) == z
    row = evaluate_point(Gaussian(2.0, z), 0.2)
    cells = row.cells()
    assert float(cells[1]) == 2.0 and complex(cells[2]) == z


def test_csv_is_byte_identical_across_runs(tmp_path):
    spec = SweepSpec("gaussian", (0.1, 0.4), (0.0, math.pi / 4), "beta_arg", {"lam": 2.0, "beta_abs": 1.5})
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    write_csv(run_sweep(spec), str(a))
    write_csv(run_sweep(spec), str(b))
    assert a.read_bytes() == b.read_bytes()


def test_parallel_matches_serial():
    spec = SweepSpec("disk", (0.2, 0.7), (0.5, 1.5))
    assert run_sweep(spec, workers=2) == run_sweep(spec)


def test_failed_point_is_flagged(monkeypatch):
    import cvtp.sweeps as mod

    def boom(*a, **k):
        raise ArithmeticError("synthetic")

    monkeypatch.setattr(mod, "maximize_three_param", boom)
    row = evaluate_point(RealLine(1.0), 0.3)
    assert not row.converged and math.isnan(row.F_opt)
    assert row.cells()[-1] == "false"


def test_presets_are_well_formed():
    assert {"fig2", "fig4", "fig5", "fig6", "fig7"} <= set(PRESETS)
    assert PRESETS["fig2"].secondary_grid[-1] == 50.0
    assert len(PRESETS["fig7"].secondary_grid) == 72


def test_infinite_segment_proxy_changes_below_1e6_from_R50_to_R100():
    from cvtp import maximize_three_param

    for r in (0.2, 1.0):
        a = maximize_three_param(RealLine(50.0), r).value
        b = maximize_three_param(RealLine(100.0), r).value
        assert abs(a - b) <= 1e-6


def test_segment_optimum_approaches_asymptote_as_inverse_square():
    from cvtp import maximize_three_param

    vals = [maximize_three_param(RealLine(R), 0.2).value for R in (50.0, 100.0, 200.0)]
    ratio = (vals[0] - vals[1]) / (vals[1] - vals[2])
    assert ratio == pytest.approx(4.0, rel=0.05)
