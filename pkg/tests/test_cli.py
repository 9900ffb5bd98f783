import os

import pytest

from pfc.cli import build_parser, load_config, main
from pfc.rng import SplitMix64


class TestSplitMix:
    def test_deterministic(self):
        a = SplitMix64(42)
        b = SplitMix64(42)
        assert [a.next_u64() for _ in range(10)] == [b.next_u64() for _ in range(10)]

    def test_uniform_open_interval(self):
        gen = SplitMix64(1)
        xs = [gen.uniform() for _ in range(10000)]
        assert all(0.0 < x < 1.0 for x in xs)
        assert abs(sum(xs) / len(xs) - 0.5) < 0.02

    def test_uniform_sym_range(self):
        gen = SplitMix64(2)
        xs = [gen.uniform_sym() for _ in range(1000)]
        assert all(-1.0 < x < 1.0 for x in xs)

    def test_reference_sequence(self):
        # first outputs of the standard 64-bit mixing sequence for seed 0
        gen = SplitMix64(0)
        assert gen.next_u64() == 0xE220A8397B1DCDAF
        assert gen.next_u64() == 0x6E789E6AA1B965F4


class TestConfig:
    def test_parse(self, tmp_path):
        path = tmp_path / "cfg.txt"
        path.write_text("# comment\nseed = 9\n[section]\ngrid-m = 32\n")
        cfg = load_config(str(path))
        assert cfg == {"seed": "9", "grid-m": "32"}

    def test_bad_line(self, tmp_path):
        path = tmp_path / "cfg.txt"
        path.write_text("not a pair\n")
        with pytest.raises(ValueError):
            load_config(str(path))

    def test_missing_file_exit_code(self, tmp_path):
        rc = main(["--config", str(tmp_path / "nope.txt"),
                   "kernels", "--mesh", "uniform:4,1.0"])
        assert rc == 3


class TestParser:
    def test_subcommand_required(self):
        with pytest.raises(SystemExit):
            build_parser().parse_args([])

    def test_kernels_needs_mesh(self):
        with pytest.raises(SystemExit):
            build_parser().parse_args(["kernels"])


class TestCommands:
    def test_kernels_command(self, tmp_path, capsys):
        report = str(tmp_path / "k.csv")
        rc = main(["kernels", "--mesh", "random:30,1.0,5", "--report", report])
        assert rc == 0
        assert os.path.exists(report)
        assert "30 levels" in capsys.readouterr().out

    def test_convergence_command_small(self, tmp_path, capsys, monkeypatch):
        # shrink the ladder through the config file override path
        out = str(tmp_path / "conv")
        import pfc.experiments as ex
        orig = ex.run_convergence
        monkeypatch.setattr(ex, "run_convergence",
                            lambda **kw: orig(**{**kw, "M": 32,
                                                 "ladder": (10, 20)}))
        rc = main(["convergence", "--grid-m", "32", "--out", out])
        assert rc == 0
        assert os.path.exists(os.path.join(out, "convergence.csv"))
        assert os.path.exists(os.path.join(out, "config.txt"))

    def test_config_file_sets_seed(self, tmp_path, monkeypatch):
        out = str(tmp_path / "conv2")
        cfg = tmp_path / "cfg.txt"
        cfg.write_text("seed = 7\n")
        captured = {}
        import pfc.experiments as ex
        monkeypatch.setattr(ex, "run_convergence",
                            lambda **kw: captured.update(kw) or [])
        rc = main(["--config", str(cfg), "convergence", "--grid-m", "32",
                   "--out", out])
        assert rc == 0
        assert captured["seed"] == 7

    def test_flag_wins_over_config(self, tmp_path, monkeypatch):
        out = str(tmp_path / "conv3")
        cfg = tmp_path / "cfg.txt"
        cfg.write_text("seed = 7\n")
        captured = {}
        import pfc.experiments as ex
        monkeypatch.setattr(ex, "run_convergence",
                            lambda **kw: captured.update(kw) or [])
        rc = main(["--config", str(cfg), "convergence", "--grid-m", "32",
                   "--seed", "99", "--out", out])
        assert rc == 0
        assert captured["seed"] == 99
