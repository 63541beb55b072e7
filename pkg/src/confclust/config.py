"""Run configuration and its INI-style file format.

A config file holds ``key = value`` lines grouped in sections::

    [input]
    data = counts.mtx
    ids = barcodes.tsv
    labels = truth.csv

    [preprocess]
    library_size = 10000
    log1p = true

    [params]
    k_prime = 20
    gamma_percent = 5
    delta_percent = 2.5
    stop_rule = gap

    [output]
    dir = run1

Every key belongs to exactly one section (see ``SECTIONS``).  Blank lines
and ``#`` or ``;`` comments are ignored.  Values given on the command line
override the file.  Numeric ranges are checked by the stage that uses them,
so an out-of-range value fails at that stage.
"""

from __future__ import annotations

import configparser
import dataclasses
from dataclasses import dataclass, fields

from .assign import FINALIZE_POLICIES
from .errors import InvalidParameter
from .ingest import FEATURES_AS_ROWS, POINTS_AS_ROWS
from .merge import StoppingRule

SECTIONS = {
    "input": ("data", "data_format", "orientation", "ids", "features", "labels"),
    "preprocess": ("library_size", "log1p"),
    "params": (
        "k_prime", "gamma_percent", "delta_percent", "stop_threshold", "stop_rule",
        "gap_ratio", "min_z", "target", "finalize", "seed", "pca_tol", "eig_tol", "eig_max_iter",
    ),
    "output": ("dir", "score_cache"),
}
DATA_FORMATS = ("auto", "dense", "mtx")
STOP_RULES = ("gap", "target_count", "z_floor")


@dataclass
class RunConfig:
    data: str | None = None
    data_format: str = "auto"
    orientation: str = FEATURES_AS_ROWS
    ids: str | None = None
    features: str | None = None
    labels: str | None = None
    library_size: float | None = None
    log1p: bool = False
    k_prime: int = 20
    gamma_percent: float = 5.0
    delta_percent: float = 2.5
    stop_threshold: int | None = None
    stop_rule: str = "gap"
    gap_ratio: float = 0.25
    min_z: float = 1.0
    target: int | None = None
    finalize: str = "leave"
    seed: int = 0
    pca_tol: float = 1e-8
    eig_tol: float = 1e-8
    eig_max_iter: int = 100_000
    dir: str | None = None
    score_cache: str | None = None

    def __post_init__(self):
        if self.data_format not in DATA_FORMATS:
            raise InvalidParameter(f"data_format must be one of {DATA_FORMATS}")
        if self.orientation not in (FEATURES_AS_ROWS, POINTS_AS_ROWS):
            raise InvalidParameter(f"orientation must be {FEATURES_AS_ROWS!r} or {POINTS_AS_ROWS!r}")
        if self.stop_rule not in STOP_RULES:
            raise InvalidParameter(f"stop_rule must be one of {STOP_RULES}")
        if self.finalize not in FINALIZE_POLICIES:
            raise InvalidParameter(f"finalize must be one of {FINALIZE_POLICIES}")

    def stopping_rule(self) -> StoppingRule:
        if self.stop_rule == "gap":
            return StoppingRule.gap(self.gap_ratio, self.min_z)
        if self.stop_rule == "z_floor":
            return StoppingRule.z_floor(self.min_z)
        if self.target is None:
            raise InvalidParameter("stop_rule = target_count needs target")
        return StoppingRule.target_count(self.target)

    def replace(self, **changes) -> "RunConfig":
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


_TYPES = {f.name: f.type for f in fields(RunConfig)}


def _convert(key, raw: str):
    kind = _TYPES[key]
    text = raw.strip()
    if "None" in kind and text.lower() in ("", "none"):
        return None
    try:
        if kind.startswith("bool"):
            low = text.lower()
            if low in ("1", "true", "yes", "on"):
                return True
            if low in ("0", "false", "no", "off"):
                return False
            raise ValueError(text)
        if kind.startswith("int"):
            return int(text)
        if kind.startswith("float"):
            return float(text)
    except ValueError:
        raise InvalidParameter(f"bad value for {key}: {raw!r}") from None
    return text


def parse_config(text: str) -> dict:
    """Parse config text into ``{field: value}`` for the keys present."""
    cp = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise InvalidParameter(f"malformed config: {exc}") from None
    out = {}
    for section in cp.sections():
        if section not in SECTIONS:
            raise InvalidParameter(f"unknown config section [{section}]")
        for key, raw in cp.items(section):
            if key not in SECTIONS[section]:
                raise InvalidParameter(f"unknown key {key!r} in [{section}]")
            out[key] = _convert(key, raw)
    return out


def load_config(path=None, **overrides) -> RunConfig:
    """Config from ``path`` (optional) with ``overrides`` applied; ``None`` overrides are skipped."""
    values = {}
    if path is not None:
        with open(path) as fh:
            values = parse_config(fh.read())
    values.update({k: v for k, v in overrides.items() if v is not None})
    return RunConfig(**values)


def format_config(cfg: RunConfig) -> str:
    """Render ``cfg`` in the file format (unset optional values are omitted)."""
    lines = []
    d = cfg.to_dict()
    for section, keys in SECTIONS.items():
        lines.append(f"[{section}]")
        for key in keys:
            if d[key] is not None:
                value = str(d[key]).lower() if isinstance(d[key], bool) else d[key]
                lines.append(f"{key} = {value}")
        lines.append("")
    return "\n".join(lines)
