from conftest import CONFIGS, MAPS, RMS
from qrmsg.cli import EXIT_INVALID, EXIT_OK, EXIT_RUNTIME, main
from qrmsg.harness import read_csv


def test_validate_shipped_files(capsys):
    paths = [str(p) for d in (MAPS, RMS, CONFIGS) for p in sorted(d.iterdir())]
    assert main(["validate", *paths]) == EXIT_OK
    assert capsys.readouterr().out.count(": ok") == len(paths)


def test_validate_reports_bad_files(tmp_path, capsys):
    bad_rm = tmp_path / "bad.rm"
    bad_rm.write_text("states: v0\ninitial: v9\nprops: p\n")
    bad_map = tmp_path / "bad.map"
    bad_map.write_text("2 2\nE .\n. a\n")
    other = tmp_path / "notes.txt"
    other.write_text("hi")
    assert main(["validate", str(bad_rm), str(bad_map), str(other)]) == EXIT_INVALID
    err = capsys.readouterr().err
    assert "bad.rm" in err and "bad.map" in err and "unknown file type" in err


def test_bad_arguments_exit_invalid(capsys):
    assert main([]) == EXIT_INVALID
    assert main(["train"]) == EXIT_INVALID
    assert main(["train", str(CONFIGS / "case1.cfg"), "--algo", "maddpg"]) == EXIT_INVALID
    assert main(["train", "/nonexistent.cfg"]) == EXIT_INVALID
    assert main(["--help"]) == EXIT_OK
    capsys.readouterr()


def test_train_writes_identical_csv(tmp_path, capsys):
    outs = []
    for name in ("a.csv", "b.csv"):
        out = tmp_path / name
        argv = ["train", str(CONFIGS / "case2.cfg"), "--seed", "3", "--episodes", "160",
                "--out", str(out), "--plotdata", str(tmp_path / "p.dat")]
        assert main(argv) == EXIT_OK
        outs.append(out.read_bytes())
    assert outs[0] == outs[1]
    assert len(read_csv(tmp_path / "a.csv")) == 2 * 2
    assert main(["eval", str(tmp_path / "a.csv")]) == EXIT_OK
    assert "seed 3: 2 checkpoints" in capsys.readouterr().out


def test_eval_rejects_garbage(tmp_path):
    f = tmp_path / "x.csv"
    f.write_text("nope\n")
    assert main(["eval", str(f)]) == EXIT_INVALID


def test_solve_game(tmp_path, capsys):
    f = tmp_path / "pd.txt"
    f.write_text("2 2\n3 0\n5 1\n3 5\n0 1\n")
    assert main(["solve-game", str(f)]) == EXIT_OK
    out = capsys.readouterr().out
    assert "ego strategy: [0. 1.]" in out and "values: ego 1, adv 1" in out
    f.write_text("2 2\n1 2 3\n")
    assert main(["solve-game", str(f)]) == EXIT_INVALID


def test_check_theory(tmp_path, capsys):
    out = tmp_path / "probe.csv"
    assert main(["check-theory", "--trials", "50", "--out", str(out)]) == EXIT_OK
    assert out.read_text().splitlines()[0] == "trial,family,dims,violation"
    assert len(out.read_text().splitlines()) == 101
    # an impossible tolerance makes the check fail at run time
    assert main(["check-theory", "--trials", "50", "--tol", "-10"]) == EXIT_RUNTIME
    capsys.readouterr()
