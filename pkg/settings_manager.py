"""
Settings Management
Coefficient field, size budgets and harness options, read from a JSON file and the environment
"""

import json
import logging
import os
from copy import deepcopy
from pathlib import Path
from typing import Any, Dict, Optional, Union

from errors import PreconditionError
from linalg import FieldConfig
from wrap1d import MIN_GRID_STEPS

CONFIG_ENV = "SHEAFCALC_CONFIG"
ENV_OVERRIDES = {
    "SHEAFCALC_FIELD": ("field", "spec"),
    "SHEAFCALC_BUDGET": ("budgets", "max_poset_size"),
    "SHEAFCALC_JOBS": ("harness", "jobs"),
    "SHEAFCALC_GRID_STEPS": ("wrap", "grid_steps"),
}


class SettingsManager:
    """Layered settings: defaults, then a JSON file, then environment variables, then explicit overrides"""

    def __init__(self, path: Optional[Union[str, Path]] = None, environ: Optional[Dict[str, str]] = None):
        self.logger = logging.getLogger(__name__)
        self.default_settings = self._get_default_settings()
        self.settings = deepcopy(self.default_settings)
        environ = os.environ if environ is None else environ
        path = path or environ.get(CONFIG_ENV)
        if path:
            self.import_settings(self._read_file(Path(path)))
        self._apply_environment(environ)

    def _get_default_settings(self) -> Dict[str, Any]:
        return {
            "field": {
                "spec": "q",
            },
            "budgets": {
                "max_poset_size": 4000,
                "max_link_size": 12,
                "max_triple_product": 729,
                "max_localization_steps": 64,
                "max_generators": 20000,
            },
            "harness": {
                "jobs": 1,
                "random_samples": 20,
                "random_kernels": 10,
                "seed": 0,
            },
            "wrap": {
                "grid_steps": 3,
            },
        }

    def _read_file(self, path: Path) -> Dict[str, Any]:
        try:
            data = json.loads(path.read_text(encoding="utf-8"))
        except OSError as e:
            raise PreconditionError(f"cannot read settings file {path}: {e}")
        except json.JSONDecodeError as e:
            raise PreconditionError(f"settings file {path} is not valid JSON: {e}")
        if not isinstance(data, dict):
            raise PreconditionError(f"settings file {path} must hold a JSON object")
        self.logger.info(f"Loaded settings from {path}")
        return data

    def _apply_environment(self, environ: Dict[str, str]):
        for variable, (category, key) in ENV_OVERRIDES.items():
            if variable in environ:
                default = self.default_settings[category][key]
                self.set(category, key, self._convert_setting_value(environ[variable], self._get_data_type(default)))
                self.logger.debug(f"{variable} overrides {category}.{key}")

    def _convert_setting_value(self, value: str, data_type: str) -> Any:
        """Convert an environment string to the type of the default"""
        try:
            if data_type == "boolean":
                return value.lower() in ("true", "1", "yes", "on")
            if data_type == "integer":
                return int(value)
            return value
        except ValueError:
            raise PreconditionError(f"expected an {data_type}, got {value!r}")

    def _get_data_type(self, value: Any) -> str:
        if isinstance(value, bool):
            return "boolean"
        if isinstance(value, int):
            return "integer"
        return "string"

    def _validate(self, category: str, key: str, value: Any):
        if category not in self.default_settings:
            raise PreconditionError(f"unknown settings category {category!r}")
        if key not in self.default_settings[category]:
            raise PreconditionError(f"unknown setting {category}.{key}")
        expected = self._get_data_type(self.default_settings[category][key])
        if self._get_data_type(value) != expected:
            raise PreconditionError(f"{category}.{key} must be {expected}, got {value!r}")
        if expected == "integer" and value < (0 if key == "seed" else 1):
            raise PreconditionError(f"{category}.{key} must be positive, got {value}")
        if (category, key) == ("field", "spec"):
            FieldConfig.parse(value)
        if (category, key) == ("wrap", "grid_steps") and value < MIN_GRID_STEPS:
            raise PreconditionError(f"wrap.grid_steps must be at least {MIN_GRID_STEPS}, got {value}")

    def get(self, category: str, key: str) -> Any:
        return self.settings[category][key]

    def set(self, category: str, key: str, value: Any):
        self._validate(category, key, value)
        self.settings[category][key] = value

    def import_settings(self, data: Dict[str, Any]):
        """Merge a nested {category: {key: value}} mapping, validating every entry"""
        for category, values in data.items():
            if not isinstance(values, dict):
                raise PreconditionError(f"settings category {category!r} must be an object")
            for key, value in values.items():
                self.set(category, key, value)

    def export_settings(self) -> Dict[str, Any]:
        return deepcopy(self.settings)

    def reset_settings(self, category: Optional[str] = None):
        if category is None:
            self.settings = deepcopy(self.default_settings)
        elif category in self.default_settings:
            self.settings[category] = deepcopy(self.default_settings[category])
        else:
            raise PreconditionError(f"unknown settings category {category!r}")

    def field_config(self) -> FieldConfig:
        return FieldConfig.parse(self.get("field", "spec"))

    def budget(self, key: str) -> int:
        return self.get("budgets", key)
