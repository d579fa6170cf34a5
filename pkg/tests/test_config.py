"""Config loading: defaults, fail-closed keys, field validation."""

import pytest

from phidro.config import (
    DEFAULTS,
    OUT_DIR_ENV,
    ConfigError,
    load_config,
    parse_config,
)
from phidro.divergence import DivergenceKind
from phidro.sampling import ScheduleKind


def write_toml(tmp_path, text, name="exp.toml"):
    path = tmp_path / name
    path.write_text(text)
    return path


class TestDefaults:
    def test_empty_config_gets_documented_defaults(self, monkeypatch):
        monkeypatch.delenv(OUT_DIR_ENV, raising=False)
        cfg = parse_config({})
        assert cfg.seeds == (0,)
        assert cfg.out_dir == "runs"
        assert cfg.methods == ("dssd", "full")
        assert cfg.dataset.kind == "synthetic"
        assert cfg.divergence_kind is DivergenceKind.CHI2
        assert cfg.rho == 0.1
        assert cfg.budget.c_infl == 1.0
        assert cfg.budget.delta == 0.05
        assert cfg.schedule_kind is ScheduleKind.GEOMETRIC
        assert cfg.gamma == 0.1
        assert cfg.max_sampled_iters is None
        assert cfg.work_budget is None

    def test_out_dir_env_fallback(self, monkeypatch):
        monkeypatch.setenv(OUT_DIR_ENV, "/tmp/elsewhere")
        cfg = parse_config({})
        assert cfg.out_dir == "/tmp/elsewhere"

    def test_explicit_out_dir_beats_env(self, monkeypatch):
        monkeypatch.setenv(OUT_DIR_ENV, "/tmp/elsewhere")
        cfg = parse_config({"out_dir": "here"})
        assert cfg.out_dir == "here"

    def test_every_default_key_parses(self):
        # DEFAULTS is the documented surface; it must validate as-is
        raw = {
            k: dict(v) if isinstance(v, dict) else v
            for k, v in DEFAULTS.items()
            if not (k == "out_dir" and v is None)
        }
        raw["dataset"] = {k: v for k, v in raw["dataset"].items() if v is not None}
        raw["optimizer"] = {
            k: v for k, v in raw["optimizer"].items() if v is not None
        }
        parse_config(raw)

    def test_resolved_mapping_reflects_overrides(self):
        cfg = parse_config({"divergence": {"rho": 0.7}})
        assert cfg.resolved["divergence"]["rho"] == 0.7
        assert cfg.resolved["budget"]["delta"] == 0.05


class TestFailClosed:
    def test_unknown_top_level_key(self):
        with pytest.raises(ConfigError, match="'rho_values'"):
            parse_config({"rho_values": [0.1]})

    def test_unknown_section_key(self):
        with pytest.raises(ConfigError, match="divergence.'roh'"):
            parse_config({"divergence": {"roh": 0.1}})

    def test_misspelled_schedule_key(self):
        with pytest.raises(ConfigError, match="schedule.'ration'"):
            parse_config({"schedule": {"ration": 0.5}})

    def test_section_must_be_table(self):
        with pytest.raises(ConfigError, match="must be a section"):
            parse_config({"divergence": "chi2"})


class TestValidation:
    def test_negative_rho_names_field(self):
        with pytest.raises(ConfigError, match="divergence.rho"):
            parse_config({"divergence": {"rho": -0.1}})

    def test_empty_seed_list(self):
        with pytest.raises(ConfigError, match="seeds"):
            parse_config({"seeds": []})

    def test_unknown_method(self):
        with pytest.raises(ConfigError, match="unknown method 'newton'"):
            parse_config({"methods": ["newton"]})

    def test_unknown_divergence(self):
        with pytest.raises(ConfigError, match="divergence.kind"):
            parse_config({"divergence": {"kind": "tv"}})

    def test_ridge_requires_positive_mu(self):
        with pytest.raises(ConfigError, match="model.mu"):
            parse_config({"model": {"kind": "ridge", "mu": 0.0}})

    def test_logistic_requires_zero_mu(self):
        with pytest.raises(ConfigError, match="model.mu"):
            parse_config({"model": {"kind": "logistic", "mu": 0.5}})

    def test_table_requires_existing_path(self, tmp_path):
        with pytest.raises(ConfigError, match="does not exist"):
            parse_config(
                {"dataset": {"kind": "table", "path": str(tmp_path / "nope.csv")}}
            )

    def test_table_requires_path_at_all(self):
        with pytest.raises(ConfigError, match="dataset.path"):
            parse_config({"dataset": {"kind": "table"}})

    def test_fixed_schedule_needs_a_cap(self):
        with pytest.raises(ConfigError, match="fixed"):
            parse_config({"schedule": {"kind": "fixed"}})

    def test_fixed_schedule_with_cap_accepted(self):
        cfg = parse_config(
            {
                "schedule": {"kind": "fixed"},
                "optimizer": {"max_sampled_iters": 50},
            }
        )
        assert cfg.schedule_kind is ScheduleKind.FIXED

    def test_bad_ratio(self):
        with pytest.raises(ConfigError, match="schedule.ratio"):
            parse_config({"schedule": {"ratio": 1.0}})

    def test_bad_test_fraction(self):
        with pytest.raises(ConfigError, match="dataset.test_fraction"):
            parse_config({"dataset": {"test_fraction": 1.0}})

    def test_bad_scale(self):
        with pytest.raises(ConfigError, match="dataset.scale"):
            parse_config({"dataset": {"scale": 0.0}})

    def test_negative_gamma(self):
        with pytest.raises(ConfigError, match="optimizer.gamma"):
            parse_config({"optimizer": {"gamma": -0.1}})


class TestFiles:
    def test_load_round_trip(self, tmp_path):
        path = write_toml(
            tmp_path,
            """
            seeds = [3, 4]
            [divergence]
            kind = "kl"
            rho = 0.5
            [schedule]
            start_size = 8
            ratio = 0.25
            """,
        )
        cfg = load_config(path)
        assert cfg.seeds == (3, 4)
        assert cfg.divergence_kind is DivergenceKind.KL
        assert cfg.rho == 0.5
        assert cfg.start_size == 8
        sched = cfg.build_schedule(100)
        assert sched.full_size == 100
        assert sched.ratio == 0.25

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError, match="does not exist"):
            load_config(tmp_path / "absent.toml")

    def test_malformed_toml(self, tmp_path):
        path = write_toml(tmp_path, "seeds = [1\n")
        with pytest.raises(ConfigError):
            load_config(path)

    def test_relative_dataset_path_anchored_at_config(self, tmp_path):
        (tmp_path / "data.txt").write_text("AAAAAAAA,1\nCCCCCCCC,-1\n")
        path = write_toml(
            tmp_path,
            """
            [dataset]
            kind = "octamer"
            path = "data.txt"
            """,
        )
        cfg = load_config(path)
        assert cfg.dataset.path == str(tmp_path / "data.txt")

    def test_start_size_clamped_to_small_data(self):
        cfg = parse_config({"schedule": {"start_size": 64}})
        assert cfg.build_schedule(20).start_size == 20
