"""Experiment configuration: strict JSON schema with a version field."""
from __future__ import annotations

import hashlib
import json
from pathlib import Path
from typing import Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from .field_lab import CA_FIELDS, CA_FIELDS_POSITIVE, EVEN_POWERS, FULL_POWERS, SYMMETRIC_5PT
from .system import MASS_PRESETS, TRANSFORMATIONS

CONFIG_VERSION = 1

SWEEP_PRESETS = {
    "ca-protocol": (CA_FIELDS, FULL_POWERS),
    "ca-protocol-positive": (CA_FIELDS_POSITIVE, FULL_POWERS),
    "symmetric-5pt": (SYMMETRIC_5PT, FULL_POWERS),
    "stark": (SYMMETRIC_5PT, EVEN_POWERS),
}


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class ParticleConfig(_Strict):
    mass: Union[float, str]
    charge: float
    label: str = ""

    @field_validator("mass")
    @classmethod
    def _mass(cls, v):
        if isinstance(v, str):
            if v not in MASS_PRESETS:
                raise ValueError(f"unknown mass preset {v!r}; known: {sorted(MASS_PRESETS)}")
            return v
        if not v > 0.0 or v != v or v == float("inf"):
            raise ValueError(f"mass must be a positive finite number, got {v}")
        return v


class SystemConfig(_Strict):
    particles: list[ParticleConfig] = Field(min_length=2)
    transformation: Literal[TRANSFORMATIONS] = "heavy-nucleus-centered"  # type: ignore[valid-type]


class BasisConfig(_Strict):
    K: int = Field(ge=1)
    placement: Literal["origin", "two-center", "random", "polarized-pairs"] = "origin"
    seed: int = 0
    d: float = 3.0
    scale: float = Field(1.0, gt=0.0)
    delta: float = Field(0.1, gt=0.0)
    parity_close: bool = False


class OptimizationConfig(_Strict):
    stat_tol: float = Field(1e-7, gt=0.0)
    max_iters: int = Field(200, ge=0)
    parity_constrained: bool = False
    reoptimize_per_field: bool = False
    lin_dep_tol: float = Field(1e-12, gt=0.0)


class SweepConfig(_Strict):
    fields: Optional[list[float]] = None
    preset: Optional[Literal[tuple(SWEEP_PRESETS)]] = None  # type: ignore[valid-type]
    fd_step: float = Field(1e-4, gt=0.0)

    @model_validator(mode="after")
    def _one_source(self):
        if (self.fields is None) == (self.preset is None):
            raise ValueError("give exactly one of 'fields' or 'preset'")
        if self.fields is not None:
            if any(f != f or abs(f) == float("inf") for f in self.fields):
                raise ValueError("fields must be finite")
            if len(set(self.fields)) != len(self.fields):
                raise ValueError("fields must be distinct")
            if len(self.fields) < 2:
                raise ValueError("at least 2 fields are required")
        return self

    def resolved_fields(self) -> tuple[float, ...]:
        return tuple(self.fields) if self.fields is not None else SWEEP_PRESETS[self.preset][0]

    def default_powers(self) -> tuple[int, ...]:
        return FULL_POWERS if self.preset is None else SWEEP_PRESETS[self.preset][1]


class FitConfig(_Strict):
    powers: Optional[list[int]] = None


class OutputConfig(_Strict):
    directory: str = "out"
    formats: list[Literal["json", "csv"]] = ["json", "csv"]


class ExperimentConfig(_Strict):
    version: Literal[1] = CONFIG_VERSION
    name: str = ""
    description: str = ""
    system: SystemConfig
    basis: BasisConfig
    optimization: OptimizationConfig = OptimizationConfig()
    sweep: SweepConfig
    fit: FitConfig = FitConfig()
    output: OutputConfig = OutputConfig()

    @model_validator(mode="after")
    def _fit_fits(self):
        powers = self.powers
        n = len(self.sweep.resolved_fields())
        if len(powers) > n:
            raise ValueError(f"fit.powers has {len(powers)} terms but the sweep only {n} fields")
        if any(p < 0 for p in powers) or any(b <= a for a, b in zip(powers, powers[1:])):
            raise ValueError("fit.powers must be non-negative and strictly increasing")
        return self

    @property
    def powers(self) -> tuple[int, ...]:
        if self.fit.powers is not None:
            return tuple(self.fit.powers)
        return self.sweep.default_powers()

    def canonical_json(self) -> str:
        return json.dumps(self.model_dump(mode="json"), sort_keys=True, separators=(",", ":"))

    def config_hash(self) -> str:
        return hashlib.sha256(self.canonical_json().encode()).hexdigest()

    def system_hash(self) -> str:
        payload = json.dumps(self.system.model_dump(mode="json"), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(payload.encode()).hexdigest()


def load_config(source: Union[str, Path, dict]) -> ExperimentConfig:
    if isinstance(source, dict):
        data = source
    else:
        data = json.loads(Path(source).read_text())
    if "provenance" in data and "config" in data:
        data = data["config"]
    return ExperimentConfig.model_validate(data)
