# -*- coding: utf-8 -*-
"""
基准测试配置
============

Default values for the benchmark harness (BenchConfig) and the user's saved
preferences (UserPreferences, a JSON file in the home directory).

Values in BenchConfig can be changed here without touching any logic.
"""
import json
import os
import sys


class BenchConfig:
    """Harness defaults."""

    # ==================== Resolution ladder ====================
    CANONICAL_SIDES = (16, 32, 64, 128, 256, 512, 1024)

    # ==================== Techniques ====================
    TECHNIQUES = ('hog', 'gist', 'cohog', 'orb')

    # ==================== Timing ====================
    TIMING_REPETITIONS = 5          # median of N runs is reported
    DEFAULT_JOBS = 1

    # ==================== Matching / accuracy ====================
    ORB_HAMMING_THRESHOLD = 64      # bits, out of 256
    GT_TOLERANCE = 0                # frame tolerance radius, 0 = exact match only

    # ==================== Synthetic datasets ====================
    SYNTH_N = 10
    SYNTH_SIDE = 128
    SYNTH_SEED = 42
    SYNTH_DISTRACTORS = 0

    # ==================== Output formats ====================
    CSV_HEADER = ('technique', 'dataset', 'resolution', 'accuracy', 'n_correct', 'n_query',
                  'encode_ms', 'match_ms', 'vpr_ms', 'ratio', 'status')
    ACCURACY_FORMAT = '{:.3f}'
    TIME_MS_FORMAT = '{:.3f}'
    RATIO_FORMAT = '{:.4f}'

    # ==================== Environment ====================
    SEED_ENV = 'VPRKIT_SEED'
    CONFIG_ENV = 'VPRKIT_CONFIG'


def log(tag: str, message: str):
    """Print a tagged diagnostic line; stdout is reserved for command output."""
    print(f"[{tag}] {message}", file=sys.stderr)


def resolve_seed(seed: int) -> int:
    """Apply the VPRKIT_SEED override, if set."""
    override = os.environ.get(BenchConfig.SEED_ENV)
    if override is None or not override.strip():
        return seed
    try:
        return int(override)
    except ValueError:
        log("Config", f"Ignoring non-integer {BenchConfig.SEED_ENV}={override!r}")
        return seed


class UserPreferences:
    """
    Manages saved harness preferences.
    Saves/loads configuration to a JSON file.
    """
    CONFIG_FILE = "vprkit_config.json"

    DEFAULT_PREFS = {
        "resolutions": list(BenchConfig.CANONICAL_SIDES),
        "techniques": list(BenchConfig.TECHNIQUES),
        "timing_repetitions": BenchConfig.TIMING_REPETITIONS,
        "jobs": BenchConfig.DEFAULT_JOBS,
        "orb_hamming_threshold": BenchConfig.ORB_HAMMING_THRESHOLD,
        "gt_tolerance": BenchConfig.GT_TOLERANCE,
        "last_dataset": "",
    }

    _prefs = None

    @classmethod
    def get_config_path(cls):
        """Get the full path to the config file."""
        override = os.environ.get(BenchConfig.CONFIG_ENV)
        if override:
            return override

        if os.name == 'nt':  # Windows
            config_dir = os.path.join(os.environ.get('APPDATA', '.'), 'vprkit')
        else:  # Linux/Mac
            config_dir = os.path.join(os.path.expanduser('~'), '.vprkit')

        if not os.path.exists(config_dir):
            try:
                os.makedirs(config_dir)
            except OSError:
                config_dir = '.'

        return os.path.join(config_dir, cls.CONFIG_FILE)

    @classmethod
    def load(cls):
        """Load preferences from config file."""
        if cls._prefs is not None:
            return cls._prefs

        config_path = cls.get_config_path()
        try:
            if os.path.exists(config_path):
                with open(config_path, 'r', encoding='utf-8') as f:
                    loaded = json.load(f)
                if not isinstance(loaded, dict):
                    raise ValueError("top-level JSON value must be an object")
                cls._prefs = cls.DEFAULT_PREFS.copy()
                for key, value in loaded.items():
                    if key in cls.DEFAULT_PREFS:
                        cls._prefs[key] = value
                log("Config", f"Loaded preferences from {config_path}")
            else:
                cls._prefs = cls.DEFAULT_PREFS.copy()
        except Exception as e:
            log("Config", f"Error loading preferences: {e}")
            cls._prefs = cls.DEFAULT_PREFS.copy()

        return cls._prefs

    @classmethod
    def save(cls):
        """Save current preferences to config file."""
        if cls._prefs is None:
            return

        config_path = cls.get_config_path()
        try:
            with open(config_path, 'w', encoding='utf-8') as f:
                json.dump(cls._prefs, f, indent=2, ensure_ascii=False)
            log("Config", f"Saved preferences to {config_path}")
        except OSError as e:
            log("Config", f"Error saving preferences: {e}")

    @classmethod
    def reset(cls):
        """Forget the cached preferences; the next get() reloads from disk."""
        cls._prefs = None

    @classmethod
    def restore_defaults(cls):
        """Replace every preference with its default and save."""
        cls._prefs = cls.DEFAULT_PREFS.copy()
        cls._prefs["resolutions"] = list(BenchConfig.CANONICAL_SIDES)
        cls._prefs["techniques"] = list(BenchConfig.TECHNIQUES)
        cls.save()

    @classmethod
    def get(cls, key, default=None):
        """Get a preference value."""
        if cls._prefs is None:
            cls.load()
        return cls._prefs.get(key, default if default is not None else cls.DEFAULT_PREFS.get(key))

    @classmethod
    def set(cls, key, value):
        """Set a preference value."""
        if cls._prefs is None:
            cls.load()
        cls._prefs[key] = value

    @classmethod
    def get_all(cls):
        """Get all preferences."""
        if cls._prefs is None:
            cls.load()
        return cls._prefs.copy()
