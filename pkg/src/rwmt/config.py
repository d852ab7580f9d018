"""Scene configuration: flat key-value text files with sections.

A scene pins everything a run needs: the space form, the warp profile with
its interval and base point, the chart (builtin family or CSV path), the
mode, tolerance overrides, and output paths.  Parsing then serializing then
parsing again is idempotent.
"""

from __future__ import annotations

import configparser
import io
import math
from dataclasses import dataclass, field

from .spaceforms import GeometryError

MODES = ("mt", "slice", "curve", "null2ff", "desitter-check")


class ConfigError(GeometryError):
    pass


def _parse_bound(text: str) -> float:
    text = text.strip().lower()
    if text in ("inf", "+inf"):
        return math.inf
    if text == "-inf":
        return -math.inf
    return float(text)


@dataclass
class SceneConfig:
    c: int = 1
    n: int = 2
    warp_expr: str = "1"
    t_min: float = -math.inf
    t_max: float = math.inf
    t0: float = 0.0
    family: str | None = None
    chart_params: dict = field(default_factory=dict)
    csv: str | None = None
    resolution: int = 17
    mode: str = "mt"
    branch: int | None = None
    period_shift: int = 0
    T: float | None = None
    tau_expr: str | None = None
    curve_length: float = 2 * math.pi
    curve_step: float = 1e-3
    tolerances: dict = field(default_factory=dict)
    report_path: str | None = None
    mesh_path: str | None = None
    seed: int = 0

    def validate(self) -> "SceneConfig":
        if self.c not in (-1, 0, 1):
            raise ConfigError(f"spaceform c must be -1, 0 or 1, got {self.c}")
        if self.n < 1:
            raise ConfigError("spaceform n must be at least 1")
        if self.mode not in MODES:
            raise ConfigError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.branch is not None and self.mode != "mt":
            raise ConfigError("branch is only meaningful in mt mode")
        if self.mode == "slice" and self.T is None:
            raise ConfigError("slice mode needs T")
        if self.mode in ("mt", "slice") and not (self.family or self.csv):
            raise ConfigError(f"{self.mode} mode needs a chart (family or csv)")
        if self.family and self.csv:
            raise ConfigError("choose either a builtin family or a csv chart")
        if self.mode == "curve" and self.n != 1:
            raise ConfigError("curve mode is one dimensional (n = 1)")
        if not self.t_min < self.t0 < self.t_max:
            raise ConfigError(
                f"t0 = {self.t0} outside interval ({self.t_min}, {self.t_max})")
        return self


def parse_config(text: str) -> SceneConfig:
    cp = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    cp.read_string(text)
    cfg = SceneConfig()
    if cp.has_section("spaceform"):
        cfg.c = cp.getint("spaceform", "c", fallback=cfg.c)
        cfg.n = cp.getint("spaceform", "n", fallback=cfg.n)
    if cp.has_section("warp"):
        cfg.warp_expr = cp.get("warp", "expr", fallback=cfg.warp_expr).strip()
        cfg.t_min = _parse_bound(cp.get("warp", "t_min", fallback="-inf"))
        cfg.t_max = _parse_bound(cp.get("warp", "t_max", fallback="inf"))
        cfg.t0 = cp.getfloat("warp", "t0", fallback=cfg.t0)
    if cp.has_section("chart"):
        cfg.family = cp.get("chart", "family", fallback=None)
        cfg.csv = cp.get("chart", "csv", fallback=None)
        cfg.resolution = cp.getint("chart", "resolution", fallback=cfg.resolution)
        for key, val in cp.items("chart"):
            if key.startswith("param."):
                name = key[len("param."):]
                cfg.chart_params[name] = (int(val) if name in ("k", "normal_sign")
                                          else float(val))
    if cp.has_section("mode"):
        cfg.mode = cp.get("mode", "mode", fallback=cfg.mode).strip()
        if cp.has_option("mode", "branch"):
            cfg.branch = cp.getint("mode", "branch")
        cfg.period_shift = cp.getint("mode", "period_shift", fallback=0)
        if cp.has_option("mode", "T"):
            cfg.T = cp.getfloat("mode", "T")
        if cp.has_option("mode", "tau_expr"):
            cfg.tau_expr = cp.get("mode", "tau_expr").strip()
        cfg.curve_length = cp.getfloat("mode", "length",
                                       fallback=cfg.curve_length)
        cfg.curve_step = cp.getfloat("mode", "step", fallback=cfg.curve_step)
    if cp.has_section("tolerances"):
        cfg.tolerances = {k: float(v) for k, v in cp.items("tolerances")}
    if cp.has_section("outputs"):
        cfg.report_path = cp.get("outputs", "report", fallback=None)
        cfg.mesh_path = cp.get("outputs", "mesh", fallback=None)
    if cp.has_section("random"):
        cfg.seed = cp.getint("random", "seed", fallback=0)
    return cfg.validate()


def load_config(path: str) -> SceneConfig:
    with open(path) as fh:
        return parse_config(fh.read())


def _fmt_bound(x: float) -> str:
    if x == math.inf:
        return "inf"
    if x == -math.inf:
        return "-inf"
    return repr(x)


def serialize_config(cfg: SceneConfig) -> str:
    """Canonical text form; parse(serialize(parse(s))) == parse(s)."""
    out = io.StringIO()
    out.write("[spaceform]\n")
    out.write(f"c = {cfg.c}\nn = {cfg.n}\n\n")
    out.write("[warp]\n")
    out.write(f"expr = {cfg.warp_expr}\n")
    out.write(f"t_min = {_fmt_bound(cfg.t_min)}\n")
    out.write(f"t_max = {_fmt_bound(cfg.t_max)}\n")
    out.write(f"t0 = {cfg.t0!r}\n\n")
    out.write("[chart]\n")
    if cfg.family:
        out.write(f"family = {cfg.family}\n")
    if cfg.csv:
        out.write(f"csv = {cfg.csv}\n")
    out.write(f"resolution = {cfg.resolution}\n")
    for key in sorted(cfg.chart_params):
        out.write(f"param.{key} = {cfg.chart_params[key]!r}\n")
    out.write("\n[mode]\n")
    out.write(f"mode = {cfg.mode}\n")
    if cfg.branch is not None:
        out.write(f"branch = {cfg.branch}\n")
    if cfg.period_shift:
        out.write(f"period_shift = {cfg.period_shift}\n")
    if cfg.T is not None:
        out.write(f"T = {cfg.T!r}\n")
    if cfg.tau_expr:
        out.write(f"tau_expr = {cfg.tau_expr}\n")
    if cfg.mode == "curve":
        out.write(f"length = {cfg.curve_length!r}\n")
        out.write(f"step = {cfg.curve_step!r}\n")
    if cfg.tolerances:
        out.write("\n[tolerances]\n")
        for key in sorted(cfg.tolerances):
            out.write(f"{key} = {cfg.tolerances[key]!r}\n")
    if cfg.report_path or cfg.mesh_path:
        out.write("\n[outputs]\n")
        if cfg.report_path:
            out.write(f"report = {cfg.report_path}\n")
        if cfg.mesh_path:
            out.write(f"mesh = {cfg.mesh_path}\n")
    out.write(f"\n[random]\nseed = {cfg.seed}\n")
    return out.getvalue()
