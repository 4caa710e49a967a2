import json

import numpy as np
import pytest

from timeslit import io as tio
from timeslit.cli import main
from timeslit.config import DEFAULTS, PRESETS, ConfigError, load_config, load_preset, parse_config, preset_text
from timeslit.observables import MomentumMap, PeakList, SpectrumGrid

BASE = """\
[run]
name = t
engine = sfa

[pulse]
omega = 0.05
f0 = 0.075
cycles = 1
"""

# small TDSE setup that runs in seconds
TINY_TDSE = """\
[run]
name = tiny
engine = tdse

[pulse]
omega = 0.25
f0 = 0.05
cycles = 1

[tdse]
r_max = 150
h_max = 3.0
order = 9
l_max = 10
k_min = 0.05
k_max = 1.5
n_k = 30
n_bound = 4

[map]
kz_min = -2
kz_max = 2
krho_max = 1
dk = 0.05
binary = true
"""


# --- io ------------------------------------------------------------------------

def test_spectrum_csv_round_trip(tmp_path):
    rng = np.random.default_rng(0)
    s = SpectrumGrid(np.sort(rng.uniform(0, 4, 50)), rng.uniform(0, 1, 50), {"engine": "sfa", "omega": 0.05})
    path = tio.write_spectrum_csv(tmp_path / "s.csv", s)
    text = path.read_text()
    assert text.startswith("# engine = sfa\n# omega = 0.05\nE,dP_dE\n")
    back = tio.read_spectrum_csv(path)
    assert np.array_equal(back.axis, s.axis) and np.array_equal(back.values, s.values)
    assert back.meta["omega"] == 0.05 and back.meta["engine"] == "sfa"
    with pytest.raises(FileNotFoundError):
        tio.read_spectrum_csv(tmp_path / "missing.csv")


def test_peaks_csv_round_trip(tmp_path):
    p = PeakList(np.array([0.3, 0.71, 1.2]), np.array([1.0, 0.5, 0.25]), np.array([0.9, 0.4, 0.2]))
    path = tio.write_peaks_csv(tmp_path / "p.csv", p, {"quantity": "dP/dE"})
    back = tio.read_peaks_csv(path)
    assert np.array_equal(back.positions, p.positions) and np.array_equal(back.prominences, p.prominences)
    assert "spacing_to_previous" in path.read_text()


def test_map_round_trips(tmp_path):
    rng = np.random.default_rng(1)
    m = MomentumMap(np.linspace(-1, 1, 7), np.linspace(0, 1, 5), rng.uniform(0, 1, (7, 5)), {"engine": "tdse"})
    back = tio.read_map(tio.write_map(tmp_path / "m.txt", m))
    assert np.array_equal(back.density, m.density) and np.array_equal(back.kz_axis, m.kz_axis)
    assert back.meta == {"engine": "tdse"}
    bin_back = tio.read_map_binary(tio.write_map_binary(tmp_path / "m.npz", m))
    assert np.array_equal(bin_back.density, m.density) and bin_back.meta == {"engine": "tdse"}
    (tmp_path / "bad.txt").write_text("hello\n")
    with pytest.raises(ValueError, match="not a momentum map"):
        tio.read_map(tmp_path / "bad.txt")


# --- config ------------------------------------------------------------------

def test_parse_defaults_and_lists():
    cfg = parse_config(BASE)
    assert cfg.name == "t" and cfg.wants_sfa and not cfg.wants_tdse
    assert cfg.tdse["l_max"] == DEFAULTS["tdse"]["l_max"][1]
    assert cfg.map["dk"] == 0.005
    cfg = parse_config(BASE.replace("engine = sfa", "engine = tdse").replace("cycles = 1", "cycles = 0.5, 1"))
    assert [p.cycles for p in cfg.pulses] == [0.5, 1.0]
    assert cfg.as_dict()["pulses"][0]["envelope"] == "flat"


@pytest.mark.parametrize("extra, key, line", [
    ("[tdse]\nbogus = 3\n", "tdse.bogus", 11),
    ("[tdse]\nl_max = -4\n", "tdse.l_max", 11),
    ("[tdse]\ndt = abc\n", "tdse.dt", 11),
    ("[map]\ndk = 0.9\n", "map.dk", 11),
])
def test_config_errors_name_key_and_line(extra, key, line):
    with pytest.raises(ConfigError) as err:
        parse_config(BASE + "\n" + extra, "x.ini")
    assert err.value.key == key and err.value.line == line
    assert f"line {line}" in str(err.value) and "x.ini" in str(err.value)


def test_config_structural_errors(tmp_path):
    with pytest.raises(ConfigError, match="unknown section"):
        parse_config(BASE + "[plots]\na = 1\n")
    with pytest.raises(ConfigError, match="required key missing"):
        parse_config(BASE.replace("f0 = 0.075\n", ""))
    with pytest.raises(ConfigError, match="one-cycle flat pulse"):
        parse_config(BASE.replace("cycles = 1", "cycles = 2"))
    with pytest.raises(ConfigError, match="non-finite"):
        parse_config(BASE.replace("f0 = 0.075", "f0 = nan"))
    with pytest.raises(ConfigError, match="not found"):
        load_config(tmp_path / "nope.ini")
    with pytest.raises(ConfigError, match="unknown preset"):
        preset_text("fig9")


def test_presets_load():
    for name in PRESETS:
        cfg = load_preset(name)
        assert cfg.name == name
    assert load_preset("fig1").pulses[0].tau == pytest.approx(4 * np.pi / 0.05)
    assert [p.cycles for p in load_preset("fig3").pulses] == [0.5, 1.0]
    fig5 = load_preset("fig5")
    assert fig5.tdse["remove_bound"] and fig5.wants_sfa and fig5.wants_tdse


# --- cli ---------------------------------------------------------------------

def test_cli_presets_and_bounds(tmp_path, capsys):
    assert main(["presets"]) == 0
    out = capsys.readouterr().out
    assert all(n in out for n in PRESETS)
    assert main(["presets", "fig5"]) == 0
    assert "remove_bound = true" in capsys.readouterr().out
    assert main(["presets", "--out", str(tmp_path)]) == 0
    assert sorted(p.name for p in tmp_path.iterdir()) == [f"{n}.ini" for n in PRESETS]
    assert main(["classical-bounds"]) == 0
    out = capsys.readouterr().out
    assert "kz in [-3, 0]" in out and "kz in [0, 3]" in out and "E_max = 4.5" in out


def test_cli_config_error_exit_code(tmp_path, capsys):
    bad = tmp_path / "bad.ini"
    bad.write_text(BASE + "\n[sfa]\nn_angles = 5\n")
    assert main(["run", "--config", str(bad), "--out", str(tmp_path / "o")]) == 1
    err = capsys.readouterr().err
    assert "line 11" in err and "sfa.n_angles" in err
    assert main(["run"]) == 1
    assert main(["run", "--config", str(bad), "--preset", "fig4"]) == 1


@pytest.fixture(scope="module")
def sfa_run(tmp_path_factory):
    out = tmp_path_factory.mktemp("fig4")
    cfg = out / "small.ini"
    cfg.write_text(BASE + "\n[map]\nkz_min = -0.5\nkz_max = 3.5\nkrho_max = 0.6\ndk = 0.01\n")
    assert main(["run", "--config", str(cfg), "--out", str(out / "a"), "--deterministic"]) == 0
    assert main(["run", "--config", str(cfg), "--out", str(out / "b"), "--deterministic"]) == 0
    return out


def test_cli_sfa_run_outputs(sfa_run):
    a = sfa_run / "a"
    manifest = json.loads((a / "manifest.json").read_text())
    assert manifest["status"] == "ok" and not manifest["partial"]
    assert manifest["threads"] == 1 and manifest["deterministic"]
    res = manifest["results"]["sfa_c1"]
    assert res["n_spectrum_peaks"] >= 8
    assert res["map_mean_kz"] == pytest.approx(1.5, abs=0.05)
    for name in ("sfa_c1_spectrum.csv", "sfa_c1_dpdkz.csv", "sfa_c1_map.txt", "sfa_c1_spectrum_peaks.csv"):
        assert name in manifest["files"] and (a / name).is_file()
    s = tio.read_spectrum_csv(a / "sfa_c1_spectrum.csv")
    assert np.all(s.values[s.axis > 4.5] == 0)


def test_cli_run_is_reproducible(sfa_run):
    a, b = sfa_run / "a", sfa_run / "b"
    for f in a.iterdir():
        if f.suffix in (".csv", ".txt"):
            assert f.read_bytes() == (b / f.name).read_bytes(), f.name


def test_cli_compare(sfa_run, tmp_path, capsys):
    spec = sfa_run / "a" / "sfa_c1_spectrum.csv"
    assert main(["compare", str(spec), str(spec), "--out", str(tmp_path)]) == 0
    text = (tmp_path / "comparison.txt").read_text()
    assert "mean_shift = 0.0" in text and "spacing_deviation = 0.0" in text
    # disjoint: energy peaks against a synthetic set far away
    far = SpectrumGrid(np.linspace(10, 12, 201), np.cos(np.linspace(0, 20, 201)) ** 2)
    tio.write_spectrum_csv(tmp_path / "far.csv", far)
    assert main(["compare", str(spec), str(tmp_path / "far.csv")]) == 0
    assert "disjoint peak sets" in capsys.readouterr().out
    assert main(["compare", str(spec), str(tmp_path / "missing.csv")]) == 1
    assert "missing.csv" in capsys.readouterr().err


def test_cli_tiny_tdse_run(tmp_path):
    cfg = tmp_path / "tiny.ini"
    cfg.write_text(TINY_TDSE)
    out = tmp_path / "run"
    assert main(["run", "--config", str(cfg), "--out", str(out), "--threads", "1"]) == 0
    manifest = json.loads((out / "manifest.json").read_text())
    res = manifest["results"]["tdse_c1"]
    assert res["ground_energy"] == pytest.approx(-0.5, abs=1e-8)
    assert res["propagation"]["norm_drift"] < 1e-6
    assert 0 < res["total_ionization"] < 1
    assert "tdse_c1_state.bin" in manifest["files"] and "tdse_c1_map.npz" in manifest["files"]
    assert manifest["config"]["tdse"]["l_max"] == 10


def test_cli_convergence_and_engine_failures(tmp_path):
    cfg = tmp_path / "strict.ini"
    cfg.write_text(TINY_TDSE.replace("l_max = 10", "l_max = 3\nstrict_l_convergence = true"))
    assert main(["run", "--config", str(cfg), "--out", str(tmp_path / "s")]) == 3
    manifest = json.loads((tmp_path / "s" / "manifest.json").read_text())
    assert manifest["status"] == "failed" and manifest["partial"] and "l_max" in manifest["error"]
    # momenta the grid cannot resolve make the continuum solver fail
    cfg.write_text(TINY_TDSE.replace("k_max = 1.5", "k_max = 9.0"))
    assert main(["run", "--config", str(cfg), "--out", str(tmp_path / "e")]) == 2
    manifest = json.loads((tmp_path / "e" / "manifest.json").read_text())
    assert manifest["status"] == "failed" and "grid too coarse" in manifest["error"]
