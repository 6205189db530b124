"""
Tests for configuration modules.
"""

import json
import os

import pytest

from nsde_bounds.config.loader import config_from_dict, config_hash, env_threads, load_config
from nsde_bounds.config.models import (
    BoxConfig,
    MonteCarloConfig,
    RunConfig,
    SolverConfig,
    SystemConfig,
)


class TestConfigLoader:
    """Test configuration loader functionality."""

    def test_load_config_with_valid_file(self, write_config):
        """Test loading configuration from valid file."""
        path = write_config({
            "system": {"kind": "linear", "A": [[-1.0]], "G": [[1.0]]},
            "x": [0.0],
            "y": [1.0],
            "T": 2.0,
            "logging": {"level": "INFO"},
            "solver": {"K": 50},
        })

        config = load_config(path)

        assert isinstance(config, RunConfig)
        assert config.system.kind == "linear"
        assert config.T == 2.0
        assert config.solver.K == 50
        assert config.logging.level == "INFO"
        # untouched sections keep their defaults
        assert config.monte_carlo.L == 100
        assert config.solver.rho_initial == 10.0

    def test_load_config_with_none_path(self, mocker):
        """Test loading configuration with None path gives defaults."""
        mocker.patch.dict(os.environ, {}, clear=True)
        mocker.patch("nsde_bounds.config.loader.load_dotenv")
        config = load_config(None)

        assert isinstance(config, RunConfig)
        assert config.system is None
        assert config.seed == 0

    def test_load_config_with_nonexistent_file(self):
        """An explicit path that does not exist is a configuration error."""
        with pytest.raises(ValueError, match="not found"):
            load_config("nonexistent_file.json")

    def test_load_config_with_invalid_json(self, temp_dir):
        """Test loading configuration with invalid JSON."""
        path = os.path.join(temp_dir, "bad.json")
        with open(path, "w") as f:
            f.write('{"invalid": "json"')

        with pytest.raises(ValueError, match="Invalid JSON"):
            load_config(path)

    def test_load_config_with_schema_violation(self, write_config):
        path = write_config({"T": -1.0})

        with pytest.raises(ValueError, match="Invalid configuration"):
            load_config(path)

    def test_load_config_from_environment(self, write_config, mocker):
        path = write_config({"seed": 42})
        mocker.patch.dict(os.environ, {"NSDE_BOUNDS_CONFIG": path})
        mocker.patch("nsde_bounds.config.loader.load_dotenv")

        config = load_config()

        assert config.seed == 42

    @pytest.mark.parametrize("raw,expected", [("4", 4), ("1", 1)])
    def test_env_threads(self, raw, expected, mocker):
        mocker.patch.dict(os.environ, {"NSDE_BOUNDS_THREADS": raw})
        mocker.patch("nsde_bounds.config.loader.load_dotenv")
        assert env_threads() == expected

    @pytest.mark.parametrize("raw", ["zero", "0", "-2"])
    def test_env_threads_invalid(self, raw, mocker):
        mocker.patch.dict(os.environ, {"NSDE_BOUNDS_THREADS": raw})
        mocker.patch("nsde_bounds.config.loader.load_dotenv")
        with pytest.raises(ValueError):
            env_threads()

    def test_env_threads_unset(self, mocker):
        mocker.patch.dict(os.environ, {}, clear=True)
        mocker.patch("nsde_bounds.config.loader.load_dotenv")
        assert env_threads() is None


class TestConfigHash:
    """The hash identifies the resolved configuration."""

    def test_hash_is_stable(self):
        a = config_from_dict({"seed": 3, "T": 1.5})
        b = config_from_dict({"T": 1.5, "seed": 3})
        assert config_hash(a) == config_hash(b)
        assert len(config_hash(a)) == 64

    def test_hash_changes_with_content(self):
        assert config_hash(config_from_dict({"seed": 1})) != config_hash(config_from_dict({"seed": 2}))

    def test_defaults_are_part_of_the_hash(self):
        explicit = config_from_dict({"solver": {"K": 200}})
        assert config_hash(explicit) == config_hash(RunConfig())


class TestConfigModels:
    """Test configuration models."""

    def test_system_config_rejects_unknown_fields(self):
        with pytest.raises(ValueError):
            SystemConfig(kind="linear", A=[[1.0]], bogus=1)

    @pytest.mark.parametrize("document", [
        {"solvr": {"K": 7}},
        {"solver": {"k": 7}},
        {"monte_carlo": {"Nlist": [1, 2]}},
        {"monte_carlo": {"sampler": {"kind": "box", "bounds": [0, 1]}}},
        {"density": {"bin": 16}},
        {"integration": {"steps": 10}},
        {"logging": {"lvl": "DEBUG"}},
        {"constants": {"k1": 2.0}},
        {"box": {"lo": [0.0], "hi": [1.0], "mid": [0.5]}},
    ])
    def test_misspelled_keys_are_rejected(self, document):
        with pytest.raises(ValueError, match="Invalid configuration"):
            config_from_dict(document)

    def test_misspelled_key_in_file(self, write_config):
        path = write_config({"system": {"kind": "linear", "A": [[-1.0]]}, "solvr": {"K": 7}})

        with pytest.raises(ValueError, match="solvr"):
            load_config(path)

    def test_system_config_family_requirements(self):
        with pytest.raises(ValueError, match="drift"):
            SystemConfig(kind="custom-expression")
        with pytest.raises(ValueError, match="rnn"):
            SystemConfig(kind="rnn")

    def test_box_config_ordering(self):
        BoxConfig(lo=[0.0, 0.0], hi=[1.0, 2.0])
        with pytest.raises(ValueError):
            BoxConfig(lo=[0.0, 3.0], hi=[1.0, 2.0])
        with pytest.raises(ValueError):
            BoxConfig(lo=[0.0], hi=[1.0, 2.0])

    def test_n_list_must_increase(self):
        with pytest.raises(ValueError, match="increasing"):
            MonteCarloConfig(N_list=[8, 8, 16])

    def test_solver_defaults(self):
        opts = SolverConfig()
        assert opts.K == 200
        assert opts.rho_initial == 10.0
        assert opts.rho_factor == 10.0
        assert opts.rho_max == 1e10

    def test_round_trip_through_json(self):
        config = config_from_dict({"system": {"kind": "rnn", "A": [[0.5]]}, "x": [0.1]})
        again = config_from_dict(json.loads(json.dumps(config.model_dump(mode="json"))))
        assert again == config
