"""Experiment config files (TOML).

Matrices are inline tables ``{ rows = r, cols = c, data = [...] }`` with
``data`` in row-major order.  Preview lists are either explicit arrays or
``{ start = a, stop = b }`` (inclusive).  See ``data/boeing747.cfg``.
"""

from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np
try:
    import tomllib as tomli
except ImportError:  # Python < 3.11
    import tomli

from .exceptions import ConfigError, PreviewLQRError
from .model import CostWeights, LtiSystem


@dataclass
class ExperimentConfig:
    system: LtiSystem
    cost: CostWeights
    horizon: int = 100
    fh_previews: list = field(default_factory=lambda: [5, 20])
    sweep: list = field(default_factory=lambda: list(range(31)))
    aug_previews: list = field(default_factory=lambda: list(range(6)))
    mc_previews: list = field(default_factory=lambda: [0, 2, 5])
    mc_horizon: int = 10000
    trials: int = 32
    seed: int = 0
    out: str = "out"
    x0: np.ndarray = None
    QT: np.ndarray = None


def bundled_config_path(name="boeing747.cfg"):
    return Path(str(resources.files("previewlqr") / "data" / name))


def _matrix(table, where):
    if not isinstance(table, dict):
        raise ConfigError(f"{where}: expected a table with rows, cols, data")
    missing = {"rows", "cols", "data"} - set(table)
    if missing:
        raise ConfigError(f"{where}: missing field(s) {', '.join(sorted(missing))}")
    rows, cols, data = table["rows"], table["cols"], table["data"]
    if not (isinstance(rows, int) and isinstance(cols, int)) or rows < 0 or cols < 0:
        raise ConfigError(f"{where}: rows and cols must be nonnegative integers")
    try:
        arr = np.array(data, dtype=float)
    except (TypeError, ValueError):
        raise ConfigError(f"{where}.data: entries must be numbers") from None
    if arr.ndim != 1 or arr.size != rows * cols:
        raise ConfigError(f"{where}.data: expected {rows * cols} numbers, got {arr.size}")
    return arr.reshape(rows, cols)


def _previews(value, where):
    if isinstance(value, dict):
        try:
            start, stop = int(value["start"]), int(value["stop"])
        except (KeyError, TypeError, ValueError):
            raise ConfigError(f"{where}: range needs integer start and stop") from None
        previews = list(range(start, stop + 1))
    elif isinstance(value, list) and all(isinstance(p, int) for p in value):
        previews = list(value)
    else:
        raise ConfigError(f"{where}: expected a list of integers or {{start, stop}}")
    if not previews or min(previews) < 0:
        raise ConfigError(f"{where}: preview list must be nonempty and nonnegative")
    return previews


def _section(doc, name):
    sec = doc.get(name)
    if not isinstance(sec, dict):
        raise ConfigError(f"missing [{name}] section")
    return sec


def parse_config(text, source="<config>"):
    try:
        doc = tomli.loads(text)
    except tomli.TOMLDecodeError as exc:
        raise ConfigError(f"{source}: {exc}") from None
    sys_sec, cost_sec = _section(doc, "system"), _section(doc, "cost")
    for key, sec, name in (("A", sys_sec, "system"), ("Bu", sys_sec, "system"),
                           ("Bw", sys_sec, "system"), ("Q", cost_sec, "cost"),
                           ("R", cost_sec, "cost")):
        if key not in sec:
            raise ConfigError(f"{source}: missing field {name}.{key}")
    try:
        system = LtiSystem(*(_matrix(sys_sec[k], f"system.{k}") for k in ("A", "Bu", "Bw")))
        cost = CostWeights(_matrix(cost_sec["Q"], "cost.Q"), _matrix(cost_sec["R"], "cost.R"))
    except ConfigError as exc:
        raise ConfigError(f"{source}: {exc}") from None
    except PreviewLQRError as exc:
        raise ConfigError(f"{source}: {exc}") from None

    exp = doc.get("experiment", {})
    kwargs = {}
    for key in ("horizon", "mc_horizon", "trials", "seed"):
        if key in exp:
            if not isinstance(exp[key], int) or exp[key] < 0:
                raise ConfigError(f"{source}: experiment.{key} must be a nonnegative integer")
            kwargs[key] = exp[key]
    for key in ("fh_previews", "sweep", "aug_previews", "mc_previews"):
        if key in exp:
            kwargs[key] = _previews(exp[key], f"{source}: experiment.{key}")
    if "out" in exp:
        kwargs["out"] = str(exp["out"])
    if "x0" in exp:
        kwargs["x0"] = np.array(exp["x0"], dtype=float)
        if kwargs["x0"].shape != (system.n_x,):
            raise ConfigError(f"{source}: experiment.x0 must have {system.n_x} entries")
    if "QT" in cost_sec:
        kwargs["QT"] = _matrix(cost_sec["QT"], "cost.QT")
    return ExperimentConfig(system, cost, **kwargs)


def load_config(path=None):
    path = bundled_config_path() if path is None else Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    return parse_config(text, str(path))
