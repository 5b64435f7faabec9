from cellsim.cli import main


def run_cli(args, capsys):
    code = main(args)
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_run_with_default_scenario(tmp_path, capsys):
    out = tmp_path / "curves.csv"
    code, stdout, stderr = run_cli(
        [
            "run",
            "--out", str(out),
            "--drops", "10",
            "--seed", "3",
            "--thresholds", "-10:10:10",
        ],
        capsys,
    )
    assert code == 0, stderr
    lines = out.read_text().splitlines()
    assert len(lines) == 4  # header + thresholds -10, 0, 10
    assert "micro" in stdout


def test_run_single_architecture(tmp_path, capsys):
    out = tmp_path / "used.csv"
    code, stdout, _ = run_cli(
        ["run", "--out", str(out), "--drops", "5", "--arch", "used", "--thresholds", "0:0:1"],
        capsys,
    )
    assert code == 0
    row = out.read_text().splitlines()[1].split(",")
    assert row[4] == "NA" and row[5] == "NA" and row[6] == "NA"
    assert "used @" in stdout


def test_config_file_plus_overrides(tmp_path, capsys):
    cfg = tmp_path / "scenario.cfg"
    cfg.write_text("n_users = 5\nn_drops = 4\ninterferer_tiers = 0\nthresholds = 0:5:5\n")
    out = tmp_path / "c.csv"
    code, _, _ = run_cli(
        ["run", "--config", str(cfg), "--out", str(out), "--combiner", "paper", "--paired", "false"],
        capsys,
    )
    assert code == 0
    assert len(out.read_text().splitlines()) == 3


def test_seed_reproducibility_through_cli(tmp_path, capsys):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    args = ["run", "--drops", "8", "--seed", "11", "--thresholds", "-5:5:5"]
    assert run_cli(args + ["--out", str(a)], capsys)[0] == 0
    assert run_cli(args + ["--out", str(b)], capsys)[0] == 0
    assert a.read_bytes() == b.read_bytes()


def test_missing_config_file_fails_cleanly(tmp_path, capsys):
    code, _, stderr = run_cli(
        ["run", "--config", str(tmp_path / "nope.cfg"), "--out", str(tmp_path / "o.csv")],
        capsys,
    )
    assert code == 1
    assert "error:" in stderr and "nope.cfg" in stderr


def test_bad_config_content_fails_cleanly(tmp_path, capsys):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("rho = banana\n")
    code, _, stderr = run_cli(
        ["run", "--config", str(cfg), "--out", str(tmp_path / "o.csv")], capsys
    )
    assert code == 1
    assert "rho" in stderr


def test_bad_thresholds_flag_fails_cleanly(tmp_path, capsys):
    code, _, stderr = run_cli(
        ["run", "--out", str(tmp_path / "o.csv"), "--thresholds", "oops"], capsys
    )
    assert code == 1
    assert "thresholds" in stderr
