import json

import pytest

from errors import PreconditionError
from linalg import FieldConfig
from settings_manager import SettingsManager


def test_defaults():
    settings = SettingsManager(environ={})
    assert settings.get("field", "spec") == "q"
    assert settings.budget("max_poset_size") == 4000
    assert settings.field_config() == FieldConfig("q")
    assert settings.get("wrap", "grid_steps") == 3


def test_environment_overrides():
    settings = SettingsManager(environ={"SHEAFCALC_FIELD": "fp:7", "SHEAFCALC_JOBS": "4"})
    assert settings.field_config() == FieldConfig("fp", 7)
    assert settings.get("harness", "jobs") == 4
    with pytest.raises(PreconditionError):
        SettingsManager(environ={"SHEAFCALC_BUDGET": "many"})


def test_settings_file(tmp_path):
    path = tmp_path / "settings.json"
    path.write_text(json.dumps({"budgets": {"max_link_size": 5}, "harness": {"seed": 0}}), encoding="utf-8")
    settings = SettingsManager(path, environ={})
    assert settings.budget("max_link_size") == 5
    settings = SettingsManager(environ={"SHEAFCALC_CONFIG": str(path), "SHEAFCALC_BUDGET": "10"})
    assert settings.budget("max_link_size") == 5
    assert settings.budget("max_poset_size") == 10
    path.write_text("[1, 2]", encoding="utf-8")
    with pytest.raises(PreconditionError):
        SettingsManager(path, environ={})


def test_validation():
    settings = SettingsManager(environ={})
    with pytest.raises(PreconditionError):
        settings.set("budgets", "max_poset_size", "big")
    with pytest.raises(PreconditionError):
        settings.set("budgets", "max_poset_size", 0)
    with pytest.raises(PreconditionError):
        settings.set("budgets", "unknown", 3)
    with pytest.raises(PreconditionError):
        settings.set("field", "spec", "fp:4")


def test_reset_and_export():
    settings = SettingsManager(environ={})
    settings.set("harness", "jobs", 3)
    settings.set("budgets", "max_generators", 10)
    exported = settings.export_settings()
    exported["harness"]["jobs"] = 8
    assert settings.get("harness", "jobs") == 3
    settings.reset_settings("harness")
    assert settings.get("harness", "jobs") == 1
    assert settings.budget("max_generators") == 10
    settings.reset_settings()
    assert settings.budget("max_generators") == 20000
    with pytest.raises(PreconditionError):
        settings.reset_settings("colors")


def test_grid_needs_three_steps_per_gap():
    with pytest.raises(PreconditionError, match="grid_steps"):
        SettingsManager(environ={"SHEAFCALC_GRID_STEPS": "2"})
    assert SettingsManager(environ={"SHEAFCALC_GRID_STEPS": "4"}).get("wrap", "grid_steps") == 4
