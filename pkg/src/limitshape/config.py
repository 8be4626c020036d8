"""Experiment configuration: JSON schema and curve-spec parsing."""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .curve import ConvexCurve, make_preset, make_tabulated

_MODES = ("calibrate", "sample", "condition", "verify", "profile", "oracle")


def curve_from_spec(spec: dict) -> ConvexCurve:
    """Build a curve from its config-file form.

    {"preset": {"name": "parabola", "c": 1.0}} or
    {"tabulated": {"points": [[u, g], ...], "k0": 0.1}}.
    """
    if "preset" in spec:
        kwargs = dict(spec["preset"])
        name = kwargs.pop("name")
        return make_preset(name, **kwargs)
    if "tabulated" in spec:
        body = spec["tabulated"]
        return make_tabulated(np.asarray(body["points"], dtype=float),
                              k0=float(body.get("k0", 1e-6)))
    raise ValueError(f"curve spec needs 'preset' or 'tabulated', got {sorted(spec)}")


@dataclass
class ExperimentConfig:
    """One study run: curve, sizes, replication and output policy."""

    mode: str
    curve_spec: dict
    n1_list: list
    replicates: int = 200
    seed: int = 0
    out_dir: str = "out"
    workers: int = 1
    epsilons: tuple = (0.2, 0.1, 0.05)
    conditioned_n1: list = field(default_factory=list)
    accepted_target: int = 60
    max_attempts: int = 2_000_000
    lclt_replicates: int = 10_000_000
    lclt_batch: int = 200_000
    n2: int | None = None
    oracle_instances: list = field(default_factory=list)
    oracle_draws: int = 200_000

    def __post_init__(self):
        if self.mode not in _MODES:
            raise ValueError(f"mode must be one of {_MODES}, got {self.mode!r}")
        if self.replicates < 1:
            raise ValueError("replicates must be >= 1")
        n1s = list(self.n1_list)
        if any(b <= a for a, b in zip(n1s, n1s[1:])):
            raise ValueError("n1 list must be strictly increasing")
        self.n1_list = [int(v) for v in n1s]
        self.epsilons = tuple(float(e) for e in self.epsilons)

    @staticmethod
    def from_dict(data: dict) -> "ExperimentConfig":
        known = {f for f in ExperimentConfig.__dataclass_fields__}
        extra = set(data) - known
        if extra:
            raise ValueError(f"unknown config keys: {sorted(extra)}")
        if "curve_spec" not in data and "curve" in data:
            data = dict(data)
            data["curve_spec"] = data.pop("curve")
        return ExperimentConfig(**data)

    @staticmethod
    def from_file(path: str) -> "ExperimentConfig":
        with open(path, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
        if "curve" in raw and "curve_spec" not in raw:
            raw["curve_spec"] = raw.pop("curve")
        return ExperimentConfig.from_dict(raw)
