import json

import numpy as np
import pytest

from hebbswarm.experiments import cli
from hebbswarm.experiments.config import ConfigError, ExperimentConfig, profile_config
from hebbswarm.experiments.plots import PlotError, emit_plots, read_csv
from hebbswarm.experiments.protocols import (RunReport, arch_grid, evolve, flex,
                                             perturb_experiment, retest, scale)
from hebbswarm.plastic_net import Architecture


def tiny(**kw):
    base = dict(generations=2, popsize=4, swarm_size=5, trial_seconds=10.0)
    base.update(kw)
    return ExperimentConfig.from_dict(base)


# config

def test_config_yaml_round_trip(tmp_path):
    cfg = tiny(condition="baseline", noise={"p_dropout": 0.1})
    cfg.save(tmp_path / "c.yaml")
    back = ExperimentConfig.load(tmp_path / "c.yaml")
    assert back == cfg
    assert back.noise["p_dropout"] == 0.1 and back.noise["std_light"] == 0.05


def test_profiles():
    small = profile_config("small")
    assert (small.popsize, small.generations, small.swarm_size, small.trial_seconds) == (
        8, 20, 10, 120.0)
    assert small.retest["repetitions"] == 10 and small.retest["save_trajectories"] == 1
    assert profile_config("full").popsize == 30
    with pytest.raises(ConfigError):
        profile_config("huge")


@pytest.mark.parametrize("bad", [{"condition": "lamarck"}, {"popsize": 1}, {"arena": "maze"},
                                 {"swarm_size": 0}, {"noise": {"gain": 1}}, {"colour": 3},
                                 {"init_range": [1, -1]}, {"trial_seconds": 0}])
def test_config_validation(bad):
    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict(bad)


def test_config_load_errors(tmp_path):
    (tmp_path / "bad.yaml").write_text("- just\n- a list\n")
    with pytest.raises(ConfigError):
        ExperimentConfig.load(tmp_path / "bad.yaml")
    with pytest.raises(ConfigError):
        ExperimentConfig.load(tmp_path / "missing.yaml")


# evolve

def test_evolve_writes_outputs(tmp_path):
    report = evolve(tiny(), tmp_path)
    assert report.genotype_dim == 720 and len(report.best_genotype) == 720
    assert [g["generation"] for g in report.generations] == [1, 2]
    for name in ("run_report.json", "learning_curve.csv", "checkpoint.json", "config.yaml"):
        assert (tmp_path / name).exists()
    lines = (tmp_path / "learning_curve.csv").read_text().splitlines()
    assert lines[0] == "generation,mean,max,best_so_far" and len(lines) == 3
    back = RunReport.from_json(tmp_path / "run_report.json")
    assert back.best_fitness == report.best_fitness
    assert 0.0 <= report.best_fitness <= 1.0


def test_evolve_is_deterministic(tmp_path):
    a = evolve(tiny(condition="baseline"), tmp_path / "a")
    b = evolve(tiny(condition="baseline"), tmp_path / "b")
    assert a.generations == b.generations and a.best_genotype == b.best_genotype


def test_evolve_resume_matches_uninterrupted(tmp_path):
    cfg = tiny(condition="baseline", generations=3)
    full = evolve(cfg, tmp_path / "full")
    evolve(cfg, tmp_path / "split", stop_after=1)
    resumed = evolve(cfg, tmp_path / "split")
    assert resumed.generations == full.generations
    assert resumed.best_genotype == full.best_genotype
    assert ((tmp_path / "split" / "learning_curve.csv").read_text()
            == (tmp_path / "full" / "learning_curve.csv").read_text())


def test_evolve_other_conditions(tmp_path):
    for cond, dim in (("baseline_a", 360), ("recurrent", 117), ("hebbian_single", 720)):
        report = evolve(tiny(condition=cond, generations=1), tmp_path / cond)
        assert report.genotype_dim == dim


# retest, scale, flex

def test_retest_outputs(tmp_path):
    cfg = tiny(condition="baseline", retest={"repetitions": 6, "save_trajectories": 2})
    g = np.random.default_rng(0).uniform(-1, 1, 180)
    summary, logs = retest(g, cfg, out_dir=tmp_path)
    assert len(summary.fitnesses) == 6 and summary.mean == pytest.approx(np.mean(summary.fitnesses))
    assert (tmp_path / "trial_0.csv").exists() and (tmp_path / "trial_1.csv").exists()
    assert not (tmp_path / "trial_2.csv").exists()
    rows = (tmp_path / "trial_0.csv").read_text().splitlines()
    assert len(rows) == 1 + 201 * 5
    assert len((tmp_path / "retest_fitness.csv").read_text().splitlines()) == 7
    with pytest.raises(ValueError):
        retest(np.zeros(10), cfg)


def test_retest_seeds_differ_from_training():
    cfg = tiny(condition="baseline", retest={"repetitions": 3})
    g = np.random.default_rng(1).uniform(-1, 1, 180)
    s, _ = retest(g, cfg)
    assert len(set(s.fitnesses)) == 3


def test_scale_and_flex(tmp_path):
    cfg = tiny(condition="baseline", trial_seconds=5.0,
               retest={"repetitions": 2, "swarm_sizes": [2, 4],
                       "arenas": ["linear", "rosenbrock"]})
    g = np.zeros(180)
    sc = scale(g, cfg, tmp_path / "scale")
    assert set(sc) == {2, 4} and sc[4].swarm_size == 4
    fl = flex(g, cfg, tmp_path / "flex")
    assert set(fl) == {"linear", "rosenbrock"} and fl["linear"].arena == "linear"
    assert set(json.loads((tmp_path / "scale" / "scale_summary.json").read_text())) == {"2", "4"}
    assert (tmp_path / "flex" / "flex_summary.json").exists()


# perturbation

def test_perturb_protocol(tmp_path):
    cfg = tiny(perturb={"seconds": 40.0, "switch_time": 20.0, "histogram_interval": 10.0,
                        "histogram_bins": 12})
    g = np.random.default_rng(2).uniform(-1, 1, 720)
    res = perturb_experiment(g, cfg, tmp_path)
    switch = 400
    assert np.array_equal(res.static.light[:switch], res.dynamic.light[:switch])
    assert np.array_equal(res.static.weights[:switch + 1], res.dynamic.weights[:switch + 1])
    assert not np.array_equal(res.static.light[switch:], res.dynamic.light[switch:])
    assert res.snapshot_times == [0, 10, 20, 30, 40]
    for name in ("static", "dynamic"):
        for t in (0, 10, 20, 30, 40):
            assert (tmp_path / f"hist_{name}_t{t}.csv").exists()
        for stem in ("light", "autocorrelation", "weight_std", "trial", "weights"):
            assert (tmp_path / f"{stem}_{name}.csv").exists()
    assert res.weight_std["static"][0] > 0


def test_perturb_requires_hebbian():
    with pytest.raises(ValueError):
        perturb_experiment(np.zeros(180), tiny(condition="baseline"))


# architecture grid

def test_architecture_grid_dimensions():
    assert Architecture.grid(2, 9).n_weights == 180
    assert Architecture.grid(2, 36).n_weights == 1692
    assert Architecture.grid(1, 3).n_weights == 33


def test_arch_grid_runs(tmp_path):
    cfg = tiny(condition="baseline", trial_seconds=2.0, repeats=1,
               arch_grid={"depths": [1, 2], "widths": [3, 9], "skip": [[2, 3]],
                          "generations": 1, "popsize": 2})
    cells = arch_grid(cfg, tmp_path)
    assert set(cells) == {(1, 3), (1, 9), (2, 9)}
    assert cells[(2, 9)].genotype_dim == 180
    assert (tmp_path / "depth1_width3" / "learning_curve.csv").exists()
    assert len(json.loads((tmp_path / "arch_grid.json").read_text())) == 3
    with pytest.raises(ValueError):
        arch_grid(tiny(), tmp_path)


# plots

def test_plots_from_outputs(tmp_path):
    evolve(tiny(condition="baseline", generations=1), tmp_path / "run")
    (tmp_path / "empty.csv").write_text("bin_left,bin_right,count\n")
    paths = emit_plots([tmp_path / "run" / "learning_curve.csv", tmp_path / "empty.csv"],
                       tmp_path / "plots")
    assert all(p.exists() and p.stat().st_size > 0 for p in paths)


def test_plot_errors(tmp_path):
    (tmp_path / "bad.csv").write_text("t,std\n0.0,1.0\n0.05\n")
    with pytest.raises(PlotError, match="row 3"):
        read_csv(tmp_path / "bad.csv")
    (tmp_path / "odd.csv").write_text("foo,bar\n1,2\n")
    with pytest.raises(PlotError, match="unrecognised"):
        read_csv(tmp_path / "odd.csv")


# command line

def test_cli_evolve_and_follow_ups(tmp_path, capsys):
    cfg = tiny(condition="baseline", generations=1,
               retest={"repetitions": 2, "swarm_sizes": [3], "arenas": ["bimodal"]})
    cfg.save(tmp_path / "c.yaml")
    run = tmp_path / "run"
    common = ["--config", str(tmp_path / "c.yaml"), "--seed", "3"]
    assert cli.run(["evolve", *common, "--out", str(run)]) == 0
    report = str(run / "run_report.json")
    assert json.loads((run / "run_report.json").read_text())["seed"] == 3
    for cmd in (["retest"], ["scale"], ["flex"]):
        assert cli.run([*cmd, *common, "--genotype", report, "--out",
                        str(tmp_path / cmd[0])]) == 0
    assert (tmp_path / "retest" / "trial_0.csv").exists()
    assert cli.run(["plot", "--out", str(tmp_path), str(run / "learning_curve.csv")]) == 0
    assert (tmp_path / "plots" / "learning_curve.png").exists()
    assert "best fitness" in capsys.readouterr().out


def test_cli_exit_codes(tmp_path):
    (tmp_path / "bad.yaml").write_text("popsize: -3\n")
    assert cli.run(["evolve", "--config", str(tmp_path / "bad.yaml")]) == 1
    assert cli.run(["retest", "--genotype", str(tmp_path / "nothing.json")]) == 1
    (tmp_path / "g.json").write_text("[1, 2, 3]")
    assert cli.run(["retest", "--genotype", str(tmp_path / "g.json"),
                    "--out", str(tmp_path)]) == 2
    (tmp_path / "broken.csv").write_text("t,light\nx,y\n")
    assert cli.run(["plot", "--out", str(tmp_path), str(tmp_path / "broken.csv")]) == 2
    assert cli.run(["evolve", "--profile", "medium"]) == 1
    assert cli.run(["evolve", "--seed", "abc"]) == 1
    assert cli.run([]) == 1
