"""
Tests for configuration (src/config.py).

Covers: defaults, validate_config.
"""

import pytest

from src.config import Config, validate_config


class TestDefaults:

    def test_latency_default(self):
        assert Config.DELIVERY_LATENCY_MS >= 1

    def test_template_dir_has_neutral_set(self):
        import os
        assert os.path.isfile(os.path.join(Config.TEMPLATE_DIR, "neutral", "service.tmpl"))


class TestValidateConfig:

    def test_valid(self):
        assert validate_config() is True

    def test_zero_latency(self, monkeypatch):
        monkeypatch.setattr(Config, "DELIVERY_LATENCY_MS", 0)
        with pytest.raises(ValueError, match="DELIVERY_LATENCY_MS"):
            validate_config()

    def test_seed_out_of_range(self, monkeypatch):
        monkeypatch.setattr(Config, "DEFAULT_SEED", 2**64)
        with pytest.raises(ValueError, match="DEFAULT_SEED"):
            validate_config()

    def test_errors_collected(self, monkeypatch, tmp_path):
        monkeypatch.setattr(Config, "DELIVERY_LATENCY_MS", 0)
        monkeypatch.setattr(Config, "TEMPLATE_DIR", str(tmp_path / "missing"))
        with pytest.raises(ValueError) as exc:
            validate_config()
        assert str(exc.value).startswith("Configuration errors: ")
        assert "TEMPLATE_DIR" in str(exc.value)
