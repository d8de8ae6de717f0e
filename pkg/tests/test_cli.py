from pathlib import Path
from unittest.mock import MagicMock, patch

import pytest

from bip_impact.cli import apply_overrides, build_parser, main
from bip_impact.core.config import load_config
from bip_impact.core.errors import ConfigurationError, PipelineStageError
from bip_impact.schemas.pipeline import PipelineReport


def _args(*argv):
    return build_parser().parse_args(["run", "--config", "pipeline.yaml", *argv])


def test_overrides_take_precedence(fixture_config_path, tmp_path):
    """Test command line flags override the config file"""
    config = load_config(fixture_config_path)
    updated = apply_overrides(
        config, _args("--max-lag", "6", "--level", "0.1", "--f-level", "0.01", "-o", str(tmp_path))
    )
    assert updated.granger.max_lags == [6]
    assert updated.granger.f_level == 0.01
    assert updated.regression.level == 0.1
    assert Path(updated.output_dir) == tmp_path.resolve()
    # The loaded config is left untouched
    assert config.granger.max_lags == [10, 6, 12]


def test_no_overrides_returns_same_config(fixture_config_path):
    """Test the config is returned as is without flags"""
    config = load_config(fixture_config_path)
    assert apply_overrides(config, _args()) is config


@pytest.mark.parametrize(
    "argv", [("--max-lag", "0"), ("--level", "1.5"), ("--t-level", "0"), ("--workers", "0")]
)
def test_invalid_overrides(fixture_config_path, argv):
    """Test out-of-range flags raise configuration errors"""
    with pytest.raises(ConfigurationError):
        apply_overrides(load_config(fixture_config_path), _args(*argv))


@patch("bip_impact.cli.Pipeline")
@patch("bip_impact.cli.load_config")
def test_run_invokes_every_stage(mock_load, mock_pipeline, capsys):
    """Test the run subcommand with a mocked pipeline"""
    mock_load.return_value = MagicMock()
    instance = mock_pipeline.return_value
    instance.completed = ["transform", "cointegrate", "clean", "signals", "causality"]
    instance.run.return_value = PipelineReport(config_hash="x", artifacts=["a", "b"])

    with patch("bip_impact.cli.apply_overrides", side_effect=lambda config, args: config):
        assert main(["run", "--config", "pipeline.yaml", "--skip-cointegration"]) == 0

    instance.run.assert_called_once_with(["cointegrate", "causality"], skip_cointegration=True)
    out = capsys.readouterr().out
    assert "Completed stages: transform, cointegrate, clean, signals, causality" in out
    assert "Artifacts: 2 files" in out


@patch("bip_impact.cli.load_config")
def test_configuration_errors_exit_with_two(mock_load, capsys):
    """Test configuration errors exit with code 2"""
    mock_load.side_effect = ConfigurationError("config file not found: x.yaml")
    assert main(["clean", "--config", "x.yaml"]) == 2
    assert "[config] config file not found" in capsys.readouterr().err


@patch("bip_impact.cli.Pipeline")
@patch("bip_impact.cli.load_config")
def test_stage_errors_exit_with_one(mock_load, mock_pipeline, capsys):
    """Test stage failures exit with code 1"""
    mock_load.return_value = MagicMock()
    error = PipelineStageError("clean", "SingularityError: rank deficient")
    mock_pipeline.return_value.run.side_effect = error
    with patch("bip_impact.cli.apply_overrides", side_effect=lambda config, args: config):
        assert main(["clean", "--config", "pipeline.yaml"]) == 1
    assert "[clean] SingularityError" in capsys.readouterr().err


def test_report_on_missing_directory(tmp_path, capsys):
    """Test auditing a missing directory"""
    assert main(["report", str(tmp_path / "absent")]) == 2
    assert "does not exist" in capsys.readouterr().err


def test_report_audits_a_run(fixture_run, capsys):
    """Test auditing a finished run"""
    pipeline, _ = fixture_run
    assert main(["report", str(pipeline.storage.root)]) == 0
    assert "0 mismatches" in capsys.readouterr().out


def test_fixture_subcommand_writes_config(tmp_path, capsys):
    """Test the fixture subcommand writes data and config"""
    assert main(["fixture", str(tmp_path / "fx"), "--seed", "3"]) == 0
    assert (tmp_path / "fx" / "pipeline.yaml").is_file()
    assert (tmp_path / "fx" / "data" / "btc.csv").is_file()
    assert "bip-impact run --config" in capsys.readouterr().out
    config = load_config(tmp_path / "fx" / "pipeline.yaml")
    assert [spec.label for spec in config.features][:2] == ["Federal Funds Rate", "M2 (US)"]


def test_parser_requires_a_subcommand():
    """Test the parser rejects a bare invocation"""
    with pytest.raises(SystemExit):
        build_parser().parse_args([])
