"""Tests for the check registry and a few of the registered checks."""

from unittest.mock import patch

import pytest

from rhls.checks import REGISTRY, CheckRegistry, check
from rhls.reports import all_passed, compare


def _reports_for(name):
    def func(n, alpha, seed):
        return [compare(name, float(seed), float(seed), 1e-12, inputs={"n": n})]

    func.__doc__ = f"Check {name}."
    return func


def test_default_registry_order():
    assert REGISTRY.names() == [
        "holder", "young", "minkowski", "riesz", "hls", "bilinear",
        "weaktype", "layercake", "transport", "el",
    ]


def test_register_and_get():
    registry = CheckRegistry()
    defn = registry.register("a", _reports_for("a"))
    assert registry.get("a") is defn
    assert defn.description == "Check a."


def test_get_unknown_check():
    registry = CheckRegistry()
    registry.register("a", _reports_for("a"))
    with pytest.raises(ValueError, match="Unknown check: 'b'"):
        registry.get("b")


def test_resolve_all():
    registry = CheckRegistry()
    registry.register("a", _reports_for("a"))
    registry.register("b", _reports_for("b"))
    assert registry.resolve(["all"]) == ["a", "b"]
    assert registry.resolve([]) == ["a", "b"]
    assert registry.resolve(["b"]) == ["b"]


def test_execute_tags_inputs():
    registry = CheckRegistry()
    defn = registry.register("a", _reports_for("a"))
    (report,) = defn.execute(2, 3.0, 7)
    assert report.inputs == {"n": 2, "check": "a", "seed": 7}


def test_run_order_independent_of_threads():
    registry = CheckRegistry()
    registry.register("a", _reports_for("a"))
    registry.register("b", _reports_for("b"))
    serial = registry.run(["all"], 1, 2.0, [0, 1, 2], threads=1)
    pooled = registry.run(["all"], 1, 2.0, [0, 1, 2], threads=4)
    assert [(r.name, r.inputs["seed"]) for r in serial] == [
        ("a", 0), ("a", 1), ("a", 2), ("b", 0), ("b", 1), ("b", 2),
    ]
    assert serial == pooled


def test_check_decorator_registers():
    registry = CheckRegistry()
    with patch("rhls.checks.REGISTRY", registry):

        @check("custom")
        def custom(n, alpha, seed):
            """Custom check."""
            return []

    assert registry.names() == ["custom"]
    assert custom._check_definition.description == "Custom check."


@pytest.mark.parametrize("name", ["holder", "minkowski", "layercake"])
def test_inequality_checks_pass(name):
    reports = REGISTRY.run([name], 1, 2.0, [0, 1, 2])
    assert reports
    assert all(r.passed for r in reports), [r.name for r in reports if not r.passed]
    assert {r.inputs["seed"] for r in reports} == {0, 1, 2}


def test_transport_check_passes():
    reports = REGISTRY.run(["transport"], 1, 2.0, [0])
    assert {r.name for r in reports} == {
        "norm_transport_p", "norm_transport_q", "dilation_norm", "dilation_quotient", "kelvin_self_inversion",
    }
    assert all(r.passed for r in reports), [r.name for r in reports if not r.passed]


def test_layercake_is_deterministic_per_seed():
    first = REGISTRY.run(["layercake"], 1, 2.0, [5])
    second = REGISTRY.run(["layercake"], 1, 2.0, [5])
    assert first == second


@pytest.mark.parametrize("n, alpha", [(1, 2.0), (2, 3.0)])
@pytest.mark.parametrize("name", REGISTRY.names())
def test_every_registered_check_passes(name, n, alpha):
    reports = REGISTRY.run([name], n, alpha, [0, 1])
    assert reports
    assert all_passed(reports), [r.name for r in reports if not r.passed]


@pytest.mark.parametrize("name", ["holder", "young", "minkowski", "riesz"])
def test_discrete_checks_hold_over_many_seeds(name):
    reports = REGISTRY.run([name], 1, 2.0, list(range(200)))
    assert len({r.inputs["seed"] for r in reports}) == 200
    assert all_passed(reports), [(r.name, r.inputs["seed"]) for r in reports if not r.passed]
