"""Scenario files: TOML text with one table per concern.

A minimal scenario::

    [target]
    geometry = "flat"

    [model]
    preset = "strongly_coupled"

    [background]
    family = "linear_map"
    C = [[0, 1, 0, 0], [0, 0, 1, 0]]

    [analysis]
    mode = "point"

    [point]
    x = [0, 0, 0, 0]

Every table and key is listed in ``SCHEMA``; anything else is a
:class:`~pullback_hyperbolicity.errors.ConfigError` that names the key and,
where it can be found, its line.
"""

from __future__ import annotations

import re
import sys
from dataclasses import dataclass, field
from pathlib import Path

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .backgrounds import BACKGROUNDS, GEOMETRIES, Background, TargetGeometry
from .errors import ConfigError
from .models import PRESETS, PowerModel

MODES = ("point", "grid", "random", "ray", "verify")
FORMATS = ("json+csv", "json", "csv")

DEFAULT_TOLERANCES = {
    "rank": 1e-9,
    "factorization": 1e-10,
    "identity": 1e-10,
    "scalar": 1e-12,
}

SCHEMA = {
    "base": {"metric"},
    "target": {"geometry", "c"},
    "model": {"preset", "c", "q"},
    "background": {"family", "y0", "C", "A", "B", "kappa", "mu"},
    "analysis": {"mode", "seed", "threads"},
    "point": {"x"},
    "grid": {"lo", "hi", "counts"},
    "random": {"samples", "lo", "hi"},
    "ray": {"x0", "k", "k_spatial", "branch", "root", "span", "step", "adaptive", "drift_tol", "gradient"},
    "verify": {"samples"},
    "tolerances": set(DEFAULT_TOLERANCES),
    "output": {"dir", "format"},
}

BACKGROUND_KEYS = {
    "constant_map": {"y0"},
    "linear_map": {"C", "y0"},
    "plane_wave": {"A", "B", "kappa"},
    "product_wave": {"A", "B", "kappa", "mu"},
}

U64_MAX = 2**64 - 1


def _line_of(text: str, section: str | None, key: str) -> int | None:
    current = None
    for lineno, line in enumerate(text.splitlines(), start=1):
        m = re.match(r"\s*\[([^\]]+)\]", line)
        if m:
            current = m.group(1).strip()
            if section is not None and key is None and current == section:
                return lineno
            continue
        if current == section and key is not None and re.match(rf"\s*{re.escape(key)}\s*=", line):
            return lineno
    return None


class _Reader:
    """Typed accessors that report failures with the offending key."""

    def __init__(self, data: dict, text: str, source: str):
        self.data = data
        self.text = text
        self.source = source

    def fail(self, section: str, key: str | None, msg: str):
        where = f"{section}.{key}" if key else section
        line = _line_of(self.text, section, key)
        loc = f"{self.source}:{line}" if line else self.source
        raise ConfigError(f"{loc}: [{where}] {msg}")

    def table(self, section: str) -> dict:
        return self.data.get(section, {})

    def has(self, section: str, key: str) -> bool:
        return key in self.table(section)

    def get(self, section, key, default=None):
        return self.table(section).get(key, default)

    def number(self, section, key, default=None, positive=False) -> float:
        v = self.get(section, key, default)
        if v is None:
            self.fail(section, key, "is required")
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            self.fail(section, key, f"must be a number, got {v!r}")
        if positive and not v > 0:
            self.fail(section, key, f"must be > 0, got {v!r}")
        return float(v)

    def integer(self, section, key, default=None, minimum=None, maximum=None) -> int:
        v = self.get(section, key, default)
        if v is None:
            self.fail(section, key, "is required")
        if isinstance(v, bool) or not isinstance(v, int):
            self.fail(section, key, f"must be an integer, got {v!r}")
        if minimum is not None and v < minimum:
            self.fail(section, key, f"must be >= {minimum}, got {v}")
        if maximum is not None and v > maximum:
            self.fail(section, key, f"must be <= {maximum}, got {v}")
        return v

    def vector(self, section, key, n, default=None) -> list[float]:
        v = self.get(section, key, default)
        if v is None:
            self.fail(section, key, "is required")
        if (
            not isinstance(v, list)
            or len(v) != n
            or any(isinstance(e, bool) or not isinstance(e, (int, float)) for e in v)
        ):
            self.fail(section, key, f"must be a list of {n} numbers, got {v!r}")
        return [float(e) for e in v]

    def choice(self, section, key, options, default=None) -> str:
        v = self.get(section, key, default)
        if v not in options:
            self.fail(section, key, f"must be one of {', '.join(options)}; got {v!r}")
        return v


@dataclass(frozen=True)
class Scenario:
    geometry: str
    geometry_params: dict
    model: PowerModel
    background: str
    background_params: dict
    mode: str
    mode_params: dict
    seed: int = 0
    threads: int = 1
    tolerances: dict = field(default_factory=lambda: dict(DEFAULT_TOLERANCES))
    output_dir: str = "out"
    output_format: str = "json+csv"
    base_metric: str = "minkowski"

    def build_geometry(self) -> TargetGeometry:
        return GEOMETRIES[self.geometry](**self.geometry_params)

    def build_background(self) -> Background:
        return BACKGROUNDS[self.background](**self.background_params)

    def to_dict(self) -> dict:
        """Normalized echo with every default filled in.

        ``threads`` is left out: it changes how the work is scheduled, never
        the result, and reports must not depend on it.
        """
        return {
            "base": {"metric": self.base_metric},
            "target": {"geometry": self.geometry, **self.geometry_params},
            "model": {"name": self.model.name, "c": self.model.c, "q": self.model.q},
            "background": {"family": self.background, **self.build_background().params()},
            "analysis": {"mode": self.mode, "seed": self.seed},
            self.mode: dict(self.mode_params),
            "tolerances": dict(self.tolerances),
            "output": {"dir": self.output_dir, "format": self.output_format},
        }


def _tuplify(v):
    return tuple(_tuplify(e) for e in v) if isinstance(v, list) else v


def parse_scenario(text: str, source: str = "<scenario>") -> Scenario:
    try:
        data = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{source}: {exc}") from None
    r = _Reader(data, text, source)

    for section, value in data.items():
        if section not in SCHEMA:
            r.fail(section, None, "unknown section")
        if not isinstance(value, dict):
            r.fail(section, None, "must be a table")
        for key in value:
            if key not in SCHEMA[section]:
                r.fail(section, key, "unknown key")

    base_metric = r.choice("base", "metric", ("minkowski",), "minkowski")

    geometry = r.choice("target", "geometry", tuple(GEOMETRIES), "flat")
    geometry_params = {}
    if geometry == "custom_diagonal":
        geometry_params["c"] = r.number("target", "c", 2.0, positive=True)
    elif r.has("target", "c"):
        r.fail("target", "c", f"only applies to custom_diagonal, not {geometry}")

    if r.has("model", "preset"):
        if r.has("model", "c") or r.has("model", "q"):
            r.fail("model", "preset", "give either a preset or c and q, not both")
        model = PRESETS[r.choice("model", "preset", tuple(PRESETS))]
    else:
        c = r.number("model", "c", -0.5)
        if c == 0:
            r.fail("model", "c", "must be nonzero")
        model = PowerModel(c=c, q=r.number("model", "q", 1.0, positive=True))

    family = r.choice("background", "family", tuple(BACKGROUNDS))
    allowed = BACKGROUND_KEYS[family]
    for key in r.table("background"):
        if key != "family" and key not in allowed:
            r.fail("background", key, f"does not apply to {family}")
    bp: dict = {}
    if "y0" in allowed:
        bp["y0"] = tuple(r.vector("background", "y0", 2, [0.0, 0.0]))
    if family == "linear_map":
        C = r.get("background", "C")
        if (
            not isinstance(C, list)
            or len(C) != 2
            or any(not isinstance(row, list) or len(row) != 4 for row in C)
        ):
            r.fail("background", "C", f"must be a 2x4 nested list, got {C!r}")
        bp["C"] = _tuplify([[float(e) for e in row] for row in C])
    if family in ("plane_wave", "product_wave"):
        bp["A"] = r.number("background", "A")
        bp["B"] = r.number("background", "B")
        bp["kappa"] = tuple(r.vector("background", "kappa", 4))
    if family == "product_wave":
        bp["mu"] = tuple(r.vector("background", "mu", 4))
        if bp["mu"] == bp["kappa"]:
            r.fail("background", "mu", "must differ from kappa")

    mode = r.choice("analysis", "mode", MODES)
    seed = r.integer("analysis", "seed", 0, minimum=0, maximum=U64_MAX)
    threads = r.integer("analysis", "threads", 1, minimum=1)

    for other in MODES:
        if other != mode and other in data:
            r.fail(other, None, f"section does not apply to mode {mode!r}")

    mp: dict = {}
    if mode == "point":
        mp["x"] = r.vector("point", "x", 4, [0.0, 0.0, 0.0, 0.0])
    elif mode == "grid":
        mp["lo"] = r.vector("grid", "lo", 4)
        mp["hi"] = r.vector("grid", "hi", 4)
        counts = r.get("grid", "counts")
        if not isinstance(counts, list) or len(counts) != 4 or any(
            isinstance(c, bool) or not isinstance(c, int) or c < 1 for c in counts
        ):
            r.fail("grid", "counts", f"must be a list of 4 integers >= 1, got {counts!r}")
        mp["counts"] = list(counts)
    elif mode == "random":
        mp["samples"] = r.integer("random", "samples", minimum=1)
        mp["lo"] = r.vector("random", "lo", 4)
        mp["hi"] = r.vector("random", "hi", 4)
    elif mode == "verify":
        mp["samples"] = r.integer("verify", "samples", 10_000, minimum=1)
    elif mode == "ray":
        mp["x0"] = r.vector("ray", "x0", 4, [0.0, 0.0, 0.0, 0.0])
        if r.has("ray", "k") == r.has("ray", "k_spatial"):
            r.fail("ray", None, "give exactly one of k (full covector) or k_spatial")
        if r.has("ray", "k"):
            mp["k"] = r.vector("ray", "k", 4)
        else:
            mp["k_spatial"] = r.vector("ray", "k_spatial", 3)
            mp["root"] = r.choice("ray", "root", ("future", "past"), "future")
        mp["branch"] = r.integer("ray", "branch", 2, minimum=1, maximum=2)
        mp["span"] = r.number("ray", "span", 10.0, positive=True)
        mp["step"] = r.number("ray", "step", 1e-3, positive=True)
        adaptive = r.get("ray", "adaptive", False)
        if not isinstance(adaptive, bool):
            r.fail("ray", "adaptive", f"must be true or false, got {adaptive!r}")
        mp["adaptive"] = adaptive
        mp["drift_tol"] = r.number("ray", "drift_tol", 1e-10, positive=True)
        mp["gradient"] = r.choice("ray", "gradient", ("fd", "analytic"), "fd")

    tolerances = dict(DEFAULT_TOLERANCES)
    for key in DEFAULT_TOLERANCES:
        if r.has("tolerances", key):
            tolerances[key] = r.number("tolerances", key, positive=True)

    return Scenario(
        geometry=geometry,
        geometry_params=geometry_params,
        model=model,
        background=family,
        background_params=bp,
        mode=mode,
        mode_params=mp,
        seed=seed,
        threads=threads,
        tolerances=tolerances,
        output_dir=str(r.get("output", "dir", "out")),
        output_format=r.choice("output", "format", FORMATS, "json+csv"),
        base_metric=base_metric,
    )


def load_scenario(path) -> Scenario:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"{path}: cannot read scenario ({exc.strerror})") from None
    return parse_scenario(text, source=str(path))
