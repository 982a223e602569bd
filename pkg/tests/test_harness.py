import csv
import io
import json

import numpy as np
import pytest

from secmimo import default_config
from secmimo.cli import main
from secmimo.config import config_to_dict
from secmimo.harness import (CSV_COLUMNS, SCHEMA_VERSION, SweepSpec,
                             run_point, run_sweep, run_trials)


def tiny(**kw):
    return default_config(L=1, K=2, N_t=16, N_e=2, T=64, **kw)


def _rows(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_smoke_point():
    pt = run_point(tiny(), trials=2, seed=0)
    assert np.all(np.isfinite(pt.proposed.rate))
    assert np.all(np.isfinite(pt.proposed.c_eve))
    assert pt.trials == 2 and pt.asymptotic.sum_rate > 0


def test_sweep_independent_of_workers():
    spec = dict(axis="rho", grid=(10, 30), trials=12, seed=3,
                schemes=("proposed", "mfan", "asymptotic"))
    one = run_sweep(SweepSpec(**spec, workers=1), tiny()).to_csv()
    many = run_sweep(SweepSpec(**spec, workers=8), tiny()).to_csv()
    assert one == many


def test_head_matches_fresh_run():
    big = run_trials(tiny(), 6, 9, mfan=True)
    small = run_trials(tiny(), 4, 9, mfan=True)
    h = big.head(4)
    assert np.array_equal(h.gains.g, small.gains.g)
    assert np.array_equal(h.mfan.eve_an, small.mfan.eve_an)


def test_snr_sweep_reuses_uplink():
    sw = run_sweep(SweepSpec(axis="snr", grid=(0, 10), trials=5, seed=1), tiny())
    a, b = sw.points
    assert a.batch is b.batch
    solo = run_point(tiny(snr_db=10), trials=5, seed=1)
    np.testing.assert_array_equal(solo.proposed.rate, b.proposed.rate)


@pytest.mark.parametrize("kw, msg", [
    (dict(axis="snr", grid=()), "empty"),
    (dict(axis="snr", grid=(5, 0)), "increasing"),
    (dict(axis="snr", grid=(1, 1)), "increasing"),
    (dict(axis="K", grid=(1,)), "axis"),
    (dict(axis="T", grid=(512,), trials=1), "trials"),
    (dict(axis="T", grid=(512,), schemes=("zf",)), "schemes"),
])
def test_sweep_spec_errors(kw, msg):
    with pytest.raises(ValueError, match=msg):
        SweepSpec(**kw)


def test_csv_schema():
    sw = run_sweep(SweepSpec(axis="T", grid=(64, 128), trials=3,
                             schemes=("proposed", "asymptotic")), tiny())
    rows = _rows(sw.to_csv())
    assert tuple(rows[0]) == CSV_COLUMNS
    assert len(rows) == 2 * 2 * 2
    assert {r["schema_version"] for r in rows} == {str(SCHEMA_VERSION)}
    assert {r["scheme"] for r in rows} == {"proposed", "asymptotic"}


# command line


@pytest.fixture
def cfg_file(tmp_path):
    p = tmp_path / "tiny.json"
    p.write_text(json.dumps(config_to_dict(tiny())))
    return str(p)


def test_cli_simulate(cfg_file, tmp_path, capsys):
    gains = tmp_path / "g.csv"
    assert main(["simulate", "--config", cfg_file, "--trials", "3",
                 "--dump-gains", str(gains)]) == 0
    rows = _rows(capsys.readouterr().out)
    assert {r["scheme"] for r in rows} == {"proposed", "asymptotic"}
    assert len(_rows(gains.read_text())) == 3 * 2 * 2 * 2


def test_cli_asymptotic(capsys):
    main(["asymptotic"])
    rows = _rows(capsys.readouterr().out)
    assert len(rows) == 5
    assert abs(float(rows[0]["gamma_bar"]) - 5.26) < 0.01


def test_cli_sweep_to_file(cfg_file, tmp_path):
    out = tmp_path / "s.csv"
    main(["sweep", "--config", cfg_file, "--axis", "snr", "--grid", "0,5",
          "--trials", "3", "--out", str(out), "--schemes", "proposed"])
    rows = _rows(out.read_text())
    assert [r["axis_value"] for r in rows] == ["0.0", "0.0", "5.0", "5.0"]


def test_cli_compare_mfan(cfg_file, capsys):
    main(["compare-mfan", "--config", cfg_file, "--trials", "4",
          "--phis", "0.5,0.9", "--rho", "30"])
    rows = _rows(capsys.readouterr().out)
    mf = [r for r in rows if r["scheme"] == "mfan"]
    assert len(mf) == 2 and mf[0]["phi"] in ("0.5", "0.9")


def test_cli_spectrum_dump(cfg_file, tmp_path, capsys):
    real = tmp_path / "r.txt"
    main(["spectrum-dump", "--config", cfg_file, "--dump-realization", str(real)])
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "index,eigenvalue,label" and len(lines) == 17
    assert lines[-1].endswith("eavesdropper")
    assert "# Yp 16 2" in real.read_text()


def test_cli_show_config(capsys):
    main(["show-config", "--rho", "10", "--Nt", "64"])
    d = json.loads(capsys.readouterr().out)
    assert d["N_t"] == 64


def test_cli_bad_input_exits(cfg_file, capsys):
    with pytest.raises(SystemExit) as exc:
        main(["sweep", "--config", cfg_file, "--axis", "T", "--grid", "128,64"])
    assert exc.value.code == 2
    assert "increasing" in capsys.readouterr().err
    with pytest.raises(SystemExit):
        main(["simulate", "--config", cfg_file, "--T", "2"])
