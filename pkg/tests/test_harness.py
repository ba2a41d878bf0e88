import json
import math

import numpy as np
import pytest

from girgfpp.cli import main
from girgfpp.config import ConfigError, ExperimentConfig, load_config
from girgfpp.graph import read_sgx
from girgfpp.harness import (DistanceSampleSet, read_distance_csv, run_distance_experiment, summarize)


def write_cfg(path, model="girg", n_grid="400, 800", law="exp:1", extra="", model_sec="d = 2\ntau = 2.5\nalpha = 1.95"):
    path.write_text(f"""[experiment]
model = {model}
n_grid = {n_grid}
length_law = {law}
pairs = 15
replicas = 2
seed = 5
output = {path.parent / 'out.csv'}
{extra}
[model]
{model_sec}
""")
    return path


def test_load_config(tmp_path):
    cfg = load_config(write_cfg(tmp_path / "c.ini"))
    assert cfg.model == "girg" and cfg.n_grid == (400, 800) and cfg.pairs == 15
    assert cfg.model_params == {"d": 2, "tau": 2.5, "alpha": 1.95}
    assert cfg.params_for(400).alpha == 1.95
    assert cfg.dist.spec == "exp:1.0"


@pytest.mark.parametrize("kwargs", [
    {"n_grid": "800, 400"},
    {"law": "banana:1"},
    {"model": "lattice"},
    {"extra": "colour = blue"},
    {"extra": "pairs = 0"},
    {"model_sec": "d = 2\nalpha = 0.5"},
])
def test_config_errors(tmp_path, kwargs):
    p = write_cfg(tmp_path / "c.ini", **kwargs)
    with pytest.raises(ConfigError):
        load_config(p)
    assert main(["distances", "--config", str(p)]) == 2


def test_missing_config(tmp_path):
    assert main(["distances", "--config", str(tmp_path / "nope.ini")]) == 2


def test_experiment_rows(tmp_path):
    cfg = load_config(write_cfg(tmp_path / "c.ini"))
    res = run_distance_experiment(cfg, workers=1)
    assert res.n_values == [400, 800]
    for model, n, seed, u, v, dg, dl, ing in res.rows:
        assert model == "girg" and u < v and ing
        assert 0 < dl < math.inf and 1 <= dg < math.inf
    back = read_distance_csv(cfg.output)
    assert back.to_csv() == res.to_csv()
    assert len(res.rows) == 2 * 2 * 15


def test_determinism_across_workers(tmp_path):
    cfg = load_config(write_cfg(tmp_path / "c.ini"))
    a = run_distance_experiment(cfg, workers=1, write=False).to_csv()
    b = run_distance_experiment(cfg, workers=8, write=False).to_csv()
    assert a == b


def test_deterministic_lengths_give_hop_counts(tmp_path):
    cfg = load_config(write_cfg(tmp_path / "c.ini", law="det:1"))
    res = run_distance_experiment(cfg, write=False)
    assert all(r[5] == r[6] for r in res.rows)


def test_summarize():
    s = DistanceSampleSet([("girg", 10, 0, 0, 1, 1.0, 0.5, True), ("girg", 10, 0, 0, 2, 3.0, 1.5, True),
                           ("girg", 20, 0, 0, 1, 2.0, 0.5, True), ("girg", 20, 0, 0, 2, 2.0, 9.0, True)])
    out = summarize(s)
    assert out["per_n"]["10"]["median_dL"] == 1.0
    assert out["per_n"]["20"]["mean_dG"] == 2.0
    assert out["ks_consecutive"]["10-20"] == 0.5


def test_cli_report(tmp_path, capsys):
    p = write_cfg(tmp_path / "c.ini")
    assert main(["distances", "--config", str(p)]) == 0
    assert main(["report", "--input", str(tmp_path / "out.csv"), "--ecdf", str(tmp_path / "ecdf.csv"),
                 "--out", str(tmp_path / "r.json")]) == 0
    rep = json.loads((tmp_path / "r.json").read_text())
    assert set(rep["per_n"]) == {"400", "800"} and "400-800" in rep["ks_consecutive"]
    assert (tmp_path / "ecdf_400_800.csv").exists()


def test_sfp_guard(tmp_path):
    bad = write_cfg(tmp_path / "c.ini", model="sfp", n_grid="5", model_sec="d = 2\nalpha_tilde = 3\ntau_tilde = 3")
    assert main(["distances", "--config", str(bad)]) == 4
    assert not (tmp_path / "out.csv").exists()
    assert main(["distances", "--config", str(bad), "--force"]) == 4
    assert (tmp_path / "out.csv").exists()


def test_sfp_run(tmp_path):
    p = write_cfg(tmp_path / "c.ini", model="sfp", n_grid="4, 8", model_sec="d = 2\nalpha_tilde = 3\ntau_tilde = 2")
    assert main(["distances", "--config", str(p)]) == 0
    res = read_distance_csv(tmp_path / "out.csv")
    assert len(res.rows) == 4  # one pair per replica


def test_hrg_run(tmp_path):
    p = write_cfg(tmp_path / "c.ini", model="hrg_threshold", n_grid="500", model_sec="alpha_H = 0.75")
    assert main(["distances", "--config", str(p)]) == 0
    assert read_distance_csv(tmp_path / "out.csv").rows


def test_resource_cap(tmp_path):
    p = write_cfg(tmp_path / "c.ini", extra="max_edges = 10")
    assert main(["distances", "--config", str(p)]) == 3


def test_cli_pipeline(tmp_path, capsys):
    cfg = write_cfg(tmp_path / "c.ini", n_grid="3000")
    g = tmp_path / "g.sgx"
    assert main(["generate", "--config", str(cfg), "--law", "exp:1", "--out", str(g)]) == 0
    assert read_sgx(g).lengths is not None
    h = tmp_path / "h.sgx"
    assert main(["percolate", "--graph", str(g), "--c", "0.9", "--law", "exp:1", "--out", str(h)]) == 0
    assert read_sgx(h).m <= read_sgx(g).m
    assert main(["percolate", "--graph", str(g), "--c", "0.9", "--law", "det:1", "--out", str(h)]) != 0
    assert main(["boxing", "--graph", str(g), "--mu", "3", "--out", str(tmp_path / "b.json")]) == 0
    rows = json.loads((tmp_path / "b.json").read_text())["annuli"]
    assert set(rows[0]) == {"k", "Dk", "Rk", "bk", "f1", "min_N", "f2", "truncated"}
    assert main(["criterion", "--law", "exp:1", "--out", str(tmp_path / "k.json")]) == 0
    assert json.loads((tmp_path / "k.json").read_text())["verdict"] == "explosive"
    assert main(["brw", "--n", "300", "--max-gen", "2", "--out", str(tmp_path / "w.json")]) == 0
    assert json.loads((tmp_path / "w.json").read_text())["generations"][0]["size"] == 1
    assert main(["boxing", "--graph", str(g), "--mu", "1e9"]) == 2
