"""Scenario files: a system configuration plus run options.

Scenarios are YAML or JSON mappings::

    label: example1
    tx_antennas: 4
    cache_ratio: "0.2"        # decimal string, parsed exactly
    groups: [[5, 2], [5, 4]]  # [size, rx_antennas] in increasing antenna order
    phantom: {hat_G: 4, omega: 3, beta: 4}   # optional
    removal_policy: drop-last                # optional
    seeds: [1, 2, 3]                         # optional
    format: table                            # optional
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import yaml

from .errors import DomainError
from .model import SystemConfig, format_ratio, validate_config
from .scheduler import REMOVAL_POLICIES

OUTPUT_FORMATS = ("table", "csv", "json")
_KNOWN_KEYS = {
    "label", "tx_antennas", "cache_ratio", "groups", "library_size", "file_size",
    "phantom", "removal_policy", "seeds", "format",
}


@dataclass(frozen=True)
class Scenario:
    config: SystemConfig
    label: str = ""
    phantom: tuple[int, int, int] | None = None  # (hat_G, omega, beta)
    removal_policy: str = "drop-last"
    seeds: tuple[int, ...] = tuple(range(1, 11))
    output_format: str = "table"

    def to_dict(self) -> dict:
        cfg = self.config
        d: dict = {"label": self.label, "tx_antennas": cfg.tx_antennas,
                   "cache_ratio": format_ratio(cfg.cache_ratio),
                   "groups": [[g.size, g.rx_antennas] for g in cfg.groups]}
        if cfg.library_size:
            d["library_size"] = cfg.library_size
        if cfg.file_size:
            d["file_size"] = cfg.file_size
        if self.phantom is not None:
            g, o, b = self.phantom
            d["phantom"] = {"hat_G": g, "omega": o, "beta": b}
        d["removal_policy"] = self.removal_policy
        d["seeds"] = list(self.seeds)
        d["format"] = self.output_format
        return d


def scenario_from_dict(d: dict, label: str = "") -> Scenario:
    if not isinstance(d, dict):
        raise DomainError("scenario must be a mapping")
    unknown = set(d) - _KNOWN_KEYS
    if unknown:
        raise DomainError(f"unknown scenario keys: {sorted(unknown)}")
    for key in ("tx_antennas", "cache_ratio", "groups"):
        if key not in d:
            raise DomainError(f"scenario is missing {key!r}")
    ratio = d["cache_ratio"]
    if isinstance(ratio, float):
        raise DomainError("cache_ratio must be a decimal string such as \"0.04\", not a float")
    groups = []
    for g in d["groups"]:
        if not (isinstance(g, (list, tuple)) and len(g) == 2):
            raise DomainError(f"each group must be [size, rx_antennas], got {g!r}")
        groups.append((int(g[0]), int(g[1])))
    cfg = SystemConfig.build(
        int(d["tx_antennas"]), str(ratio), groups,
        library_size=int(d.get("library_size", 0)), file_size=int(d.get("file_size", 0)),
    )
    validate_config(cfg)
    phantom = None
    if d.get("phantom") is not None:
        p = d["phantom"]
        phantom = (int(p["hat_G"]), int(p["omega"]), int(p["beta"]))
    policy = d.get("removal_policy", "drop-last")
    if policy not in REMOVAL_POLICIES:
        raise DomainError(f"removal_policy must be one of {REMOVAL_POLICIES}")
    fmt = d.get("format", "table")
    if fmt not in OUTPUT_FORMATS:
        raise DomainError(f"format must be one of {OUTPUT_FORMATS}")
    seeds = tuple(int(s) for s in d.get("seeds", range(1, 11)))
    return Scenario(cfg, str(d.get("label", label)), phantom, policy, seeds, fmt)


def loads_scenario(text: str, label: str = "") -> Scenario:
    return scenario_from_dict(yaml.safe_load(text), label)


def dumps_scenario(scn: Scenario, fmt: str = "yaml") -> str:
    d = scn.to_dict()
    if fmt == "json":
        return json.dumps(d, indent=2) + "\n"
    return yaml.safe_dump(d, sort_keys=False, default_flow_style=None)


def load_scenario(path) -> Scenario:
    """Load a scenario from a file, or a built-in one by name."""
    p = Path(path)
    if not p.exists() and str(path) in BUILTIN:
        return BUILTIN[str(path)]
    if not p.exists():
        raise DomainError(f"no scenario file {path} (built-ins: {', '.join(BUILTIN)})")
    return loads_scenario(p.read_text(), label=p.stem)


def _builtin(label, L, gamma, groups, phantom=None) -> Scenario:
    return Scenario(SystemConfig.build(L, gamma, groups), label, phantom)


BUILTIN = {
    "example1": _builtin("example1", 4, "0.2", [(5, 2), (5, 4)], phantom=(4, 3, 4)),
    "table1a": _builtin("table1a", 12, "0.04", [(25, 2), (75, 4)]),
    "table1b": _builtin("table1b", 12, "0.04", [(50, 2), (50, 4)]),
    "table1c": _builtin("table1c", 12, "0.04", [(75, 2), (25, 4)]),
}
