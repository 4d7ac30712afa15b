import csv
import os

import pytest

from erica.cli import OUT_DIR_ENV, main
from erica.scenario import build_single, serialize

SHORT = ["--duration", "0.05"]


def read(path):
    with open(path, "rb") as fh:
        return fh.read()


def test_oracle_gfc2_table(capsys):
    assert main(["oracle", "gfc2"]) == 0
    rows = list(csv.DictReader(capsys.readouterr().out.splitlines()))
    assert len(rows) == 22
    rates = {r["vc_id"][0]: float(r["rate_mbps"]) for r in rows}
    assert rates == {"A": 10.0, "B": 5.0, "C": 35.0, "D": 35.0, "E": 35.0, "F": 10.0, "G": 5.0, "H": 52.5}


def test_oracle_capped_vc_gets_cap_and_rest_is_shared(tmp_path, capsys):
    path = tmp_path / "cap.scn"
    path.write_text(serialize(build_single(3, rate=90.0)))
    assert main(["oracle", str(path), "--set", "vc.V1.pcr=10"]) == 0
    rows = {r["vc_id"]: float(r["rate_mbps"]) for r in csv.DictReader(capsys.readouterr().out.splitlines())}
    assert rows["V1"] == pytest.approx(10.0)
    assert rows["V2"] == pytest.approx(40.0) and rows["V3"] == pytest.approx(40.0)


def test_sim_writes_csvs_and_report(tmp_path, capsys):
    out = tmp_path / "o"
    code = main(["sim", "single", *SHORT, "--out", str(out)])
    assert code == 0  # no acceptance thresholds on this scenario
    assert sorted(os.listdir(out)) == ["acr.csv", "queue.csv", "report.txt", "utilization.csv"]
    assert read(out / "acr.csv").splitlines()[0] == b"time_s,vc_id,acr_cells_per_s"
    assert read(out / "queue.csv").splitlines()[0] == b"time_s,port_id,queue_cells"
    assert read(out / "utilization.csv").splitlines()[0] == b"time_s,port_id,utilization"
    assert len(read(out / "acr.csv").splitlines()) == 51
    assert "result = pass" in capsys.readouterr().out


def test_sim_exit_one_when_threshold_missed(tmp_path, capsys):
    code = main(["sim", "single", *SHORT, "--out", str(tmp_path), "--set", "acceptance.max_queue=0"])
    assert code == 1
    assert "max_queue = FAIL" in capsys.readouterr().out


def test_output_directory_from_environment(tmp_path, monkeypatch):
    monkeypatch.setenv(OUT_DIR_ENV, str(tmp_path / "env"))
    assert main(["sim", "single", *SHORT]) == 0
    assert (tmp_path / "env" / "acr.csv").exists()


def test_parse_error_exits_two_with_line(tmp_path, capsys):
    path = tmp_path / "bad.scn"
    path.write_text("format_version = 1\n[link a]\nfrom = x\n")
    assert main(["sim", str(path), "--out", str(tmp_path)]) == 2
    assert "line " in capsys.readouterr().err


def test_missing_file_exits_two(tmp_path, capsys):
    assert main(["oracle", str(tmp_path / "none.scn")]) == 2
    assert "error" in capsys.readouterr().err


def test_unknown_override_lists_valid_keys(capsys):
    assert main(["oracle", "single", "--set", "erica.speed=3"]) == 2
    err = capsys.readouterr().err
    assert "valid keys" in err and "erica.delta" in err


def test_usage_errors_exit_two(capsys):
    with pytest.raises(SystemExit) as info:
        main(["sim"])
    assert info.value.code == 2
    with pytest.raises(SystemExit) as info:
        main(["fluid", "--n", "two"])
    assert info.value.code == 2


def test_fluid_single_source(tmp_path, capsys):
    assert main(["fluid", "--n", "1", "--seeds", "5", "--out", str(tmp_path)]) == 0
    out = capsys.readouterr().out.splitlines()
    assert out[0] == "n,runs,converged,matches_oracle,median_cycles,max_cycles"
    assert out[1].startswith("1,5,5,5,")
    header = read(tmp_path / "fluid_cycles_n1.csv").splitlines()[0]
    assert header == b"cycle,z,min_rate,max_rate,fairness_index,in_region"


def test_fluid_with_a_capped_source(tmp_path, capsys):
    assert main(["fluid", "--n", "4", "--seeds", "20", "--caps", "0.05,none", "--out", str(tmp_path)]) == 0
    line = capsys.readouterr().out.splitlines()[1]
    assert line.startswith("4,20,20,")


def test_fluid_reports_fit_for_several_sizes(tmp_path, capsys):
    assert main(["fluid", "--n", "2,8,32", "--seeds", "30", "--out", str(tmp_path)]) == 0
    assert "# fit: median_cycles =" in capsys.readouterr().out
    rows = read(tmp_path / "fluid_seeds.csv").splitlines()
    assert len(rows) == 1 + 90


def test_repeated_runs_give_identical_bytes(tmp_path):
    for d in ("a", "b"):
        assert main(["sim", "single", "--duration", "0.1", "--seed", "3", "--set", "vc.V1.start=0.01",
                     "--out", str(tmp_path / d)]) == 0
    for name in ("acr.csv", "queue.csv", "utilization.csv", "report.txt"):
        assert read(tmp_path / "a" / name) == read(tmp_path / "b" / name)
