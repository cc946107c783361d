"""Tests for settings resolution and the ordered thread-pool map."""

import time
from unittest.mock import patch

import pytest
from pydantic import ValidationError

from rhls.config import Settings, get_settings, ordered_map


def test_defaults():
    with patch.dict("os.environ", {}, clear=True):
        settings = get_settings()
    assert settings.sphere_nodes == 256
    assert settings.log_half_width == 24.0
    assert settings.log_step == pytest.approx(12.0 / 512.0)
    assert settings.threads >= 1


def test_env_overrides_default():
    with patch.dict("os.environ", {"RHLS_THREADS": "3", "RHLS_LOG_STEP": "0.05"}, clear=True):
        settings = get_settings()
    assert settings.threads == 3
    assert settings.log_step == 0.05


def test_explicit_argument_wins_over_env():
    with patch.dict("os.environ", {"RHLS_SPHERE_NODES": "64"}, clear=True):
        settings = get_settings(sphere_nodes=32)
    assert settings.sphere_nodes == 32


def test_invalid_env_value_rejected():
    with patch.dict("os.environ", {"RHLS_THREADS": "0"}, clear=True):
        with pytest.raises(ValidationError):
            get_settings()


def test_settings_frozen():
    settings = Settings()
    with pytest.raises(ValidationError):
        settings.threads = 7


def test_ordered_map_preserves_input_order():
    def slow_square(x):
        # later items finish first
        time.sleep(0.01 * (5 - x))
        return x * x

    assert ordered_map(slow_square, [0, 1, 2, 3, 4], max_workers=5) == [0, 1, 4, 9, 16]


def test_ordered_map_same_result_for_any_worker_count():
    items = list(range(20))
    one = ordered_map(lambda x: x ** 0.5, items, max_workers=1)
    many = ordered_map(lambda x: x ** 0.5, items, max_workers=8)
    assert one == many


def test_ordered_map_empty():
    assert ordered_map(lambda x: x, []) == []


def test_ordered_map_propagates_errors():
    def boom(x):
        raise ValueError(f"bad {x}")

    with pytest.raises(ValueError, match="bad"):
        ordered_map(boom, [1, 2], max_workers=2)
