import csv
import io
import math

import numpy as np
import pytest

from tailpoint import sim
from tailpoint.delimit import report
from tailpoint.dist import studentt
from tailpoint.sim import (
    MseStudyConfig,
    SweepSpec,
    Target,
    mse_rows_to_csv,
    preset,
    replication_seed,
    rows_to_csv,
    run_mse_studies,
    run_mse_study,
    run_sweep,
    scatter_families,
    true_point,
)

SMALL = dict(nu_values=(1.0, 100.0), n_values=(100, 300), replications=6)


# configuration and seeds


def test_config_defaults():
    cfg = MseStudyConfig()
    assert cfg.nu_values == (1.0, 5.0, 100.0)
    assert cfg.n_values == (100, 500, 2000)
    assert cfg.replications == 1000
    assert cfg.target is Target.PINF


@pytest.mark.parametrize(
    "kwargs",
    [dict(nu_values=(0.0,)), dict(nu_values=()), dict(n_values=(1,)), dict(replications=0), dict(base_seed=-1)],
)
def test_config_validation(kwargs):
    with pytest.raises(ValueError):
        MseStudyConfig(**kwargs)


def test_replication_seeds():
    a = replication_seed(0, 5.0, 100, 3)
    assert a == replication_seed(0, 5.0, 100, 3)
    others = {replication_seed(*args) for args in [(1, 5.0, 100, 3), (0, 5.5, 100, 3), (0, 5.0, 101, 3), (0, 5.0, 100, 4)]}
    assert a not in others and len(others) == 4
    assert 0 <= a < 2**64


def test_true_points():
    assert true_point(Target.PMCONV, 1.0) == pytest.approx(1.0, abs=1e-15)
    assert true_point(Target.PINF, 1.0) == pytest.approx(1 / math.sqrt(3))
    assert true_point("pinf", 100.0) == pytest.approx(math.sqrt(100 / 102))


# MSE study


def test_study_deterministic_and_order_invariant():
    cfg = MseStudyConfig(**SMALL, base_seed=11)
    first = run_mse_studies(cfg, workers=1)
    again = run_mse_studies(cfg, workers=1)
    parallel = run_mse_studies(cfg, workers=2)
    for target in Target:
        for a, b, c in zip(first[target].cells, again[target].cells, parallel[target].cells):
            assert a.mse == b.mse == c.mse
            assert a.seeds == b.seeds == c.seeds
            assert np.array_equal(a.estimates, b.estimates) and np.array_equal(a.estimates, c.estimates)


def test_study_cell_contents():
    cfg = MseStudyConfig(**SMALL, base_seed=2, target="pmconv")
    res = run_mse_study(cfg, workers=1)
    assert res.config.target is Target.PMCONV
    assert res.table().shape == (2, 2)
    cell = res.cell(100.0, 300)
    assert cell.true_point == true_point(Target.PMCONV, 100.0)
    assert len(cell.seeds) == 6 and cell.estimates.shape == (6,)
    assert cell.mse == pytest.approx(np.mean((cell.estimates - cell.true_point) ** 2), rel=1e-14)
    assert cell.seeds[4] == replication_seed(2, 100.0, 300, 4)
    # a replication is reproducible on its own from its recorded seed
    data = sim.make_bundle(studentt(100.0)).sample(300, cell.seeds[4])
    h1 = sim.amise_bandwidth(1, 300, sim._roughness(100.0)[0])
    h2 = sim.amise_bandwidth(2, 300, sim._roughness(100.0)[1])
    assert sim.sample_delimiting_points(data, 0.0, "right", h1, h2).pmconv_n == cell.estimates[4]


def test_mse_csv_schema():
    cfg = MseStudyConfig(nu_values=(5.0,), n_values=(100,), replications=2, base_seed=9)
    text = mse_rows_to_csv(run_mse_studies(cfg, workers=1).values())
    rows = list(csv.DictReader(io.StringIO(text)))
    assert text.splitlines()[0] == "target,nu,n,N,mse,base_seed"
    assert [r["target"] for r in rows] == ["pinf", "pmconv"]
    assert rows[0]["N"] == "2" and rows[0]["base_seed"] == "9" and rows[0]["n"] == "100"
    assert float(rows[0]["mse"]) >= 0


def test_mse_decreases_from_smallest_to_largest_n():
    cfg = MseStudyConfig(replications=100, base_seed=5)
    results = run_mse_studies(cfg)
    for target in Target:
        table = results[target].table()
        assert np.all(table[-1] < table[0]), (target, table)


@pytest.mark.slow
def test_pmconv_mse_exceeds_pinf_mse_on_average():
    inf, conv = [], []
    for seed in range(5):
        res = run_mse_studies(MseStudyConfig(replications=100, base_seed=seed))
        inf.append(res[Target.PINF].table())
        conv.append(res[Target.PMCONV].table())
    assert np.all(np.mean(conv, axis=0) >= np.mean(inf, axis=0))


def test_thread_count(monkeypatch):
    monkeypatch.delenv("TAILPOINT_THREADS", raising=False)
    assert sim.thread_count() == 1
    monkeypatch.setenv("TAILPOINT_THREADS", "3")
    assert sim.thread_count() == 3
    for bad in ("0", "-2", "two"):
        monkeypatch.setenv("TAILPOINT_THREADS", bad)
        with pytest.raises(ValueError, match="TAILPOINT_THREADS"):
            sim.thread_count()


# sweeps


def test_presets_shapes():
    assert preset("studentt-nu").grid[0] == 1.0 and preset("studentt-nu").grid[-1] == 20.0
    assert len(preset("studentt-nu").grid) == 40
    g = preset("gaussian-sigma").grid
    assert g[0] == pytest.approx(0.1) and g[-1] == pytest.approx(100.0)
    assert np.allclose(np.diff(np.log(g)), np.log(1000) / 39)
    assert preset("lognormal-sigma").fixed == {"mu": 0.0}
    sk = preset("skewt-grid")
    assert 3.0 in sk.grid and 0.0 in sk.grid2 and 10.0 in sk.grid2
    with pytest.raises(KeyError, match="available"):
        preset("nope")


def test_sweep_spec_validation():
    with pytest.raises(ValueError, match="strictly increasing"):
        SweepSpec("gaussian", "sigma", (1.0, 1.0))
    with pytest.raises(ValueError, match="no parameter"):
        SweepSpec("gaussian", "nu", (1.0,))
    with pytest.raises(ValueError, match="unknown family"):
        SweepSpec("weibull", "k", (1.0,))
    with pytest.raises(ValueError, match="outputs"):
        SweepSpec("gaussian", "sigma", (1.0,), outputs=frozenset({"median"}))


def test_studentt_row_at_three():
    (row,) = run_sweep(SweepSpec("studentt", "nu", (3.0,)), workers=1)
    assert row["status"] == "ok"
    assert row["pinf_r"] == pytest.approx(0.7746, abs=1e-4)
    assert row["pmconv_r"] == pytest.approx(1.3416, abs=1e-4)
    # grid oracle on the density's second derivative
    b = sim.make_bundle(studentt(3.0))
    x = np.linspace(0.0, 3.0, 300001)
    d2 = b.d2pdf(x)
    assert row["pmconv_r"] == pytest.approx(x[np.argmax(d2)], abs=2e-5)
    assert row["pinf_r"] == pytest.approx(x[np.flatnonzero(d2 > 0)[0]], abs=2e-5)
    assert row["kurtosis"] is None
    assert row["q95"] == pytest.approx(2.3533634, abs=1e-6)


def test_sweep_invalid_point_fails_row_only():
    rows = run_sweep(SweepSpec("studentt", "nu", (-1.0, 3.0)), workers=1)
    assert rows[0]["status"].startswith("failed:") and "nu" in rows[0]["status"]
    assert rows[0]["pinf_r"] is None
    assert rows[1]["status"] == "ok"


def test_sweep_outputs_subset_and_order():
    spec = SweepSpec("gaussian", "sigma", (1.0, 2.0), outputs=frozenset({"q95", "pinf_r"}))
    assert spec.columns == ("param_value", "pinf_r", "q95", "status")
    rows = run_sweep(spec, workers=1)
    assert [r["pinf_r"] for r in rows] == [1.0, 2.0]
    assert set(rows[0]) == set(spec.columns)


def test_sweep_parallel_matches_serial():
    spec = SweepSpec("lognormal", "sigma", (0.2, 0.6, 1.0), {"mu": 0.0})
    assert run_sweep(spec, workers=1) == run_sweep(spec, workers=2)


def test_lognormal_sweep_opposite_behaviour():
    rows = run_sweep(preset("lognormal-sigma"), workers=1)
    cdf = [r["cdf_pmconv_r"] for r in rows]
    q95 = [r["q95"] for r in rows]
    assert all(a > b for a, b in zip(cdf, cdf[1:]))
    assert all(a < b for a, b in zip(q95, q95[1:]))
    for r in rows:
        assert r["q95"] == pytest.approx(math.exp(1.6448536269514722 * r["param_value"]), rel=1e-12)


def test_skewt_row_without_skew_matches_studentt():
    (row,) = run_sweep(SweepSpec("skewt", "nu", (3.0,), {}, sim.ALL_OUTPUTS, "s", (0.0,)), workers=1)
    ref = report(studentt(3.0)).right
    assert row["param2_value"] == 0.0
    for name in ("pinf", "pmconv", "pmcurv"):
        assert abs(row[f"{name}_r"] - getattr(ref, name)) < 1e-6
        assert abs(row[f"cdf_{name}_r"] - ref.cdf_at[name]) < 1e-6


def test_exponential_sweep_has_no_inflection():
    rows = run_sweep(SweepSpec("exponential", "rate", (0.5, 2.0)), workers=1)
    assert all(r["pinf_r"] is None and r["cdf_pinf_r"] is None and r["pmconv_r"] == 0.0 for r in rows)
    assert [r["kurtosis"] for r in rows] == [9.0, 9.0]


# scatter and CSV


def test_scatter_rows():
    rows = {r["label"]: r for r in scatter_families()}
    g = rows["gaussian"]
    assert g["cdf_pmconv_r"] == pytest.approx(0.9584, abs=5e-4)
    assert g["cdf_pinf_r"] == pytest.approx(0.841, abs=5e-4)
    # PMCurv coordinate from a dense grid of the Gaussian curvature
    x = np.linspace(0, 4, 400001)
    phi = np.exp(-x * x / 2) / math.sqrt(2 * math.pi)
    kappa = (x * x - 1) * phi / (1 + (x * phi) ** 2) ** 1.5
    from scipy.special import ndtr

    assert g["cdf_pmcurv_r"] == pytest.approx(ndtr(x[np.argmax(kappa)]), abs=1e-6)
    c = rows["cauchy"]
    assert c["cdf_pmconv_r"] == pytest.approx(0.75, abs=1e-9)
    assert c["cdf_pinf_r"] == pytest.approx(2 / 3, abs=1e-9)
    kappa_c = (6 * x * x - 2) / (math.pi * (1 + x * x) ** 3)
    kappa_c = kappa_c / (1 + (2 * x / (math.pi * (1 + x * x) ** 2)) ** 2) ** 1.5
    assert c["cdf_pmcurv_r"] == pytest.approx(0.5 + math.atan(x[np.argmax(kappa_c)]) / math.pi, abs=1e-6)
    assert rows["exponential-1"]["cdf_pinf_r"] is None
    assert all(set(r) == set(sim.SCATTER_COLUMNS) for r in rows.values())


def test_rows_to_csv_formatting():
    text = rows_to_csv([{"a": None, "b": np.float64(0.1), "c": 3, "d": "x,y"}], ("a", "b", "c", "d"))
    assert text == 'a,b,c,d\n,0.1,3,"x,y"\n'
