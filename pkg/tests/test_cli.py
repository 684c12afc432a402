import json

import numpy as np
import pytest

from emin.bench import gen_cc_matrix, gen_grid_energy
from emin.cli import main
from emin.core import read_pwe, write_pwe
from emin.corrclust import read_aff, write_aff


@pytest.fixture
def pwe_file(tmp_path):
    en = gen_grid_energy(4, 4, 3, 2.0, 0)
    path = tmp_path / "in.pwe"
    write_pwe(en, str(path))
    return str(path)


@pytest.fixture
def aff_file(tmp_path):
    W, _ = gen_cc_matrix(20, 3, 0.5, 0.0, 0)
    path = tmp_path / "in.aff"
    write_aff(W, str(path))
    return str(path)


def test_solve_subcommand(pwe_file, capsys):
    rc = main(["solve", "--energy", pwe_file, "--solver", "icm"])
    assert rc == 0
    out = capsys.readouterr().out
    assert out.startswith("energy ")
    labels = out.splitlines()[1].split()[1:]
    assert len(labels) == 16


def test_cc_subcommand(aff_file, capsys):
    rc = main(["cc", "--affinity", aff_file, "--solver", "adaptive-icm"])
    assert rc == 0
    out = capsys.readouterr().out
    assert "energy " in out and "k " in out and "labels " in out


def test_gen_grid_round_trips(tmp_path, capsys):
    out = tmp_path / "g.pwe"
    rc = main(["gen", "grid", "--height", "3", "--width", "4", "--labels",
               "2", "--lam", "1.5", "--out", str(out)])
    assert rc == 0
    en = read_pwe(str(out))
    assert en.n == 12 and en.l == 2


def test_gen_cc_round_trips(tmp_path):
    out = tmp_path / "g.aff"
    gt = tmp_path / "gt.txt"
    rc = main(["gen", "cc", "--n", "30", "--k", "3", "--density", "0.5",
               "--noise", "0.1", "--out", str(out), "--gt", str(gt)])
    assert rc == 0
    W = read_aff(str(out))
    assert W.shape == (30, 30)
    labels = [int(t) for t in gt.read_text().split()]
    assert len(labels) == 30


def test_oracle_matches_solver_lower_bound(tmp_path, capsys):
    en = gen_grid_energy(2, 3, 2, 1.0, 0)
    path = tmp_path / "small.pwe"
    write_pwe(en, str(path))
    rc = main(["oracle", "--energy", str(path)])
    assert rc == 0
    oracle_energy = float(capsys.readouterr().out.splitlines()[0].split()[1])
    rc = main(["solve", "--energy", str(path), "--solver", "icm"])
    solver_energy = float(capsys.readouterr().out.splitlines()[0].split()[1])
    assert solver_energy >= oracle_energy - 1e-9


def test_bench_subcommand(tmp_path, capsys):
    cfg = {
        "generators": [{"name": "g", "kind": "grid", "h": 4, "w": 4, "l": 2,
                        "lam": 1.0}],
        "solvers": ["icm"],
        "seeds": [0, 1],
    }
    cfg_path = tmp_path / "cfg.json"
    cfg_path.write_text(json.dumps(cfg))
    out_dir = tmp_path / "out"
    rc = main(["bench", "--config", str(cfg_path), "--out", str(out_dir)])
    assert rc == 0
    assert (out_dir / "report.csv").exists()


def test_parse_error_exit_code(tmp_path, capsys):
    bad = tmp_path / "bad.pwe"
    bad.write_text("garbage")
    rc = main(["solve", "--energy", str(bad), "--solver", "icm"])
    assert rc == 2
    rc = main(["solve", "--energy", str(tmp_path / "missing.pwe"),
               "--solver", "icm"])
    assert rc == 2


def test_size_cap_exit_code(tmp_path, capsys):
    en = gen_grid_energy(10, 10, 5, 1.0, 0)
    path = tmp_path / "big.pwe"
    write_pwe(en, str(path))
    rc = main(["oracle", "--energy", str(path)])
    assert rc == 3


def test_solve_deterministic(pwe_file, capsys):
    main(["solve", "--energy", pwe_file, "--solver", "swap", "--seed", "4"])
    first = capsys.readouterr().out
    main(["solve", "--energy", pwe_file, "--solver", "swap", "--seed", "4"])
    second = capsys.readouterr().out
    assert first == second
