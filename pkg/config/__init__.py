"""
Settings Manager for the Rendezvous & Docking MPC Simulator

Loads, saves and exposes application settings (logging, solver, metrics, output).
"""

import json
import logging
from pathlib import Path
from typing import Any, Dict, Optional

PROJECT_ROOT = Path(__file__).parent.parent

DEFAULT_SETTINGS: Dict[str, Any] = {
    "logging": {
        "level": "INFO",
        "to_file": True,
        "directory": "logs"
    },
    "solver": {
        "tol": 1e-8,
        "max_iter": 200,
        "slack_weight": 1e6
    },
    "metrics": {
        "angle_threshold_deg": 0.5,
        "range_threshold": 0.05,
        "steady_window": 100.0,
        "early_window": 20.0
    },
    "output": {
        "directory": "results",
        "formats": ["csv", "json"]
    }
}


class Settings:
    """Manages application settings backed by a JSON file."""

    def __init__(self, config_file: Optional[str] = None):
        """Initialize settings manager.

        Args:
            config_file: Path to configuration file. If None, uses default location.
        """
        if config_file is None:
            self.config_path = Path(__file__).parent / "settings.json"
        else:
            self.config_path = Path(config_file)

        self.logger = logging.getLogger(__name__)
        self._settings: Dict[str, Any] = {}
        self._load_settings()

    def _load_settings(self) -> None:
        """Load settings from the configuration file, filling gaps from the defaults."""
        try:
            if self.config_path.exists():
                with open(self.config_path, 'r', encoding='utf-8') as f:
                    loaded = json.load(f)
                self._settings = _merge(DEFAULT_SETTINGS, loaded)
            else:
                self._create_default_settings()
        except (OSError, json.JSONDecodeError) as e:
            self.logger.warning(f"Error loading settings from {self.config_path}: {e}; using defaults")
            self._settings = json.loads(json.dumps(DEFAULT_SETTINGS))

    def _create_default_settings(self) -> None:
        self._settings = json.loads(json.dumps(DEFAULT_SETTINGS))
        self.save()

    def get(self, key: str, default: Any = None) -> Any:
        """Get a setting value using dot notation.

        Args:
            key: Setting key (e.g., 'solver.tol' or 'metrics.steady_window')
            default: Default value if key not found

        Returns:
            Setting value or default
        """
        value = self._settings
        try:
            for k in key.split('.'):
                value = value[k]
            return value
        except (KeyError, TypeError):
            return default

    def set(self, key: str, value: Any) -> None:
        """Override one setting in memory using dot notation.

        Raises:
            KeyError: the key is empty or runs through a non-section value
        """
        keys = [k for k in key.split('.') if k]
        if not keys:
            raise KeyError(f"Empty settings key: {key!r}")
        section = self._settings
        for k in keys[:-1]:
            section = section.setdefault(k, {})
            if not isinstance(section, dict):
                raise KeyError(f"Settings key {key!r} runs through the value of '{k}'")
        section[keys[-1]] = value
        self.logger.debug(f"Setting {key} overridden with {value!r}")

    def save(self) -> bool:
        """Save settings to the configuration file.

        Returns:
            True if successful, False otherwise
        """
        try:
            self.config_path.parent.mkdir(parents=True, exist_ok=True)
            with open(self.config_path, 'w', encoding='utf-8') as f:
                json.dump(self._settings, f, indent=4, ensure_ascii=False)
            return True
        except OSError as e:
            self.logger.warning(f"Error saving settings: {e}")
            return False

    def solver_options(self) -> Dict[str, float]:
        """Keyword arguments for the QP solver and its relaxation penalty."""
        return {
            "tol": float(self.get('solver.tol', 1e-8)),
            "max_iter": int(self.get('solver.max_iter', 200)),
            "slack_weight": float(self.get('solver.slack_weight', 1e6)),
        }

    def get_log_dir(self) -> Path:
        return PROJECT_ROOT / self.get('logging.directory', 'logs')

    def get_output_path(self) -> Path:
        return PROJECT_ROOT / self.get('output.directory', 'results')


def _merge(defaults: Dict[str, Any], loaded: Dict[str, Any]) -> Dict[str, Any]:
    merged = json.loads(json.dumps(defaults))
    for key, value in loaded.items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = _merge(merged[key], value)
        else:
            merged[key] = value
    return merged


# Global settings instance
settings = Settings()
