"""Scenario schema: YAML (or JSON) files validated with strict pydantic models.

A scenario file looks like::

    kind: gate            # optional; must match the subcommand when given
    params:
      zeta: 0.02
      omega_r: 30
    output:
      dir: results        # overridden by --out

Unknown keys anywhere are rejected.
"""

from __future__ import annotations

import math
import os
from pathlib import Path
from typing import Any, Literal, Optional, Union

import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from ..exceptions import ConfigError

__all__ = [
    "KINDS",
    "PARAM_MODELS",
    "Scenario",
    "load_scenario",
    "validate_params",
]

KINDS = ("spectrum", "gate", "readout", "swap", "cphase", "schedule", "sweep", "compare")


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class _Pair(_Strict):
    zeta: float = Field(0.02, gt=0, lt=1)
    xi: float = Field(0.1, gt=0, lt=1)

    @model_validator(mode="after")
    def _separated(self):
        if self.xi <= self.zeta:
            raise ValueError(f"xi={self.xi} must exceed zeta={self.zeta}")
        return self


class SpectrumParams(_Strict):
    zeta_min: float = Field(1e-3, gt=0)
    zeta_max: float = Field(0.3, gt=0)
    n_points: int = Field(50, ge=0)
    spacing: Literal["log", "linear"] = "log"
    theta: float = math.pi / 2
    zetas: Optional[list[float]] = None

    @model_validator(mode="after")
    def _range(self):
        if self.zeta_max < self.zeta_min:
            raise ValueError("zeta_max must be at least zeta_min")
        if self.zetas is not None and any(z <= 0 for z in self.zetas):
            raise ValueError("every zeta must be positive")
        return self


class GateParams(_Strict):
    zeta: float = Field(0.02, gt=0, lt=1)
    omega_r: float = Field(30.0, gt=0)
    rotation_angle: float = Field(math.pi, ge=0)
    detuning: float = 0.0
    phase: float = 0.0
    initial: Literal["G", "-"] = "G"


class ReadoutParams(_Strict):
    zeta: float = Field(0.02, gt=0, lt=1)
    omega_p: float = Field(5.0, ge=0)
    eta: float = Field(0.3, gt=0, le=1)
    n_traj: int = Field(10_000, ge=1)
    seed: int = Field(0, ge=0)
    initial: Literal["G", "-"] = "-"
    mode: Literal["measure", "initialize"] = "measure"
    duration: Optional[float] = Field(None, gt=0)
    n_jobs: int = Field(1, ge=1)
    write_events: bool = False


class SwapParams(_Pair):
    fraction: Literal[1.0, 0.5] = 1.0
    arrangement: Literal["matched", "crossed", "parallel"] = "matched"
    initial: Literal["GG", "-G", "G-", "--"] = "-G"


class CphaseParams(_Pair):
    omega_c: float = Field(30.0, gt=0)
    arrangement: Literal["matched", "crossed", "parallel"] = "matched"
    initial: Literal["GG", "-G", "G-", "--"] = "GG"
    calibrate: bool = True


class ChainSpec(_Strict):
    n_sites: int = Field(2, ge=1)
    zeta: float = Field(0.02, gt=0, lt=1)
    xi: float = Field(0.1, gt=0, lt=1)
    stark_mismatch: Optional[float] = None
    delta_inh: float = Field(0.0, ge=0)
    seed: Optional[int] = Field(None, ge=0)


class SiteSpec(_Strict):
    position: tuple[float, float, float]
    axis: tuple[float, float, float]
    zeta: float = Field(gt=0)
    detuning: float = 0.0


class LayoutSpec(_Strict):
    xi: float = Field(gt=0)
    sites: list[SiteSpec]
    dipole: tuple[float, float, float] = (0.0, 1.0, 0.0)


class GateSpec(_Strict):
    kind: Literal["rotation", "readout", "swap", "sqrt_swap", "cphase"]
    sites: list[int]
    angle: Optional[float] = None


class Defaults(_Strict):
    omega_r: float = Field(30.0, gt=0)
    omega_p: float = Field(5.0, ge=0)
    omega_c: float = Field(30.0, gt=0)
    eta: float = Field(0.3, gt=0, le=1)


class ScheduleParams(_Strict):
    chain: Optional[ChainSpec] = None
    layout: Optional[LayoutSpec] = None
    circuit: list[GateSpec] = Field(default_factory=list)
    defaults: Defaults = Defaults()
    simulate: bool = True
    initial: Optional[str] = None

    @model_validator(mode="after")
    def _one_layout(self):
        if (self.chain is None) == (self.layout is None):
            raise ValueError("give exactly one of 'chain' or 'layout'")
        return self


class SweepParams(_Strict):
    target: Literal["spectrum", "gate", "swap", "cphase", "readout", "compare"]
    base: dict[str, Any] = Field(default_factory=dict)
    grid: dict[str, list[Union[float, int, str]]] = Field(default_factory=dict)
    n_jobs: int = Field(default_factory=lambda: os.cpu_count() or 1, ge=1)
    seed: int = Field(0, ge=0)


class CompareParams(_Strict):
    omega: float = Field(30.0, gt=0)
    zeta: float = Field(0.02, gt=0, lt=1)
    xi: float = Field(0.1, gt=0, lt=1)
    delta_e: Optional[float] = Field(None, gt=0)


PARAM_MODELS: dict[str, type[_Strict]] = {
    "spectrum": SpectrumParams,
    "gate": GateParams,
    "readout": ReadoutParams,
    "swap": SwapParams,
    "cphase": CphaseParams,
    "schedule": ScheduleParams,
    "sweep": SweepParams,
    "compare": CompareParams,
}


class OutputSpec(_Strict):
    dir: Optional[str] = None
    prefix: str = ""


class Scenario(_Strict):
    kind: Optional[Literal[KINDS]] = None  # type: ignore[valid-type]
    params: dict[str, Any] = Field(default_factory=dict)
    output: OutputSpec = OutputSpec()


def _line_of(node, loc) -> int | None:
    """1-based line of the YAML node at ``loc`` (keys / indices), best effort."""
    line = None
    for key in loc:
        if node is None:
            break
        line = node.start_mark.line + 1
        if isinstance(node, yaml.MappingNode):
            nxt = None
            for k, v in node.value:
                if k.value == str(key):
                    line = k.start_mark.line + 1
                    nxt = v
                    break
            node = nxt
        elif isinstance(node, yaml.SequenceNode) and isinstance(key, int) and key < len(node.value):
            node = node.value[key]
        else:
            break
    if node is not None:
        line = node.start_mark.line + 1
    return line


def _format_errors(exc: ValidationError, root, prefix=()) -> str:
    lines = []
    for err in exc.errors():
        loc = tuple(prefix) + tuple(err["loc"])
        where = ".".join(str(p) for p in loc) or "<root>"
        line = _line_of(root, loc) if root is not None else None
        at = f" (line {line})" if line else ""
        lines.append(f"{where}{at}: {err['msg']}")
    return "\n".join(lines)


def validate_params(kind: str, params: dict, root=None, prefix=("params",)):
    """Validate a parameter block for ``kind``; raises :class:`ConfigError` with field paths."""
    try:
        return PARAM_MODELS[kind].model_validate(params)
    except ValidationError as exc:
        raise ConfigError(_format_errors(exc, root, prefix)) from None


def load_scenario(path: str | Path | None, kind: str) -> tuple[Scenario, BaseModel]:
    """Parse and validate a scenario file for subcommand ``kind``.

    With ``path=None`` all parameters take their defaults.
    """
    root = None
    doc: Any = {}
    if path is not None:
        try:
            text = Path(path).read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from None
        try:
            root = yaml.compose(text)
            doc = yaml.safe_load(text)
        except yaml.YAMLError as exc:
            mark = getattr(exc, "problem_mark", None)
            where = f" at line {mark.line + 1}, column {mark.column + 1}" if mark else ""
            raise ConfigError(f"cannot parse {path}{where}: {getattr(exc, 'problem', exc)}") from None
        if doc is None:
            doc = {}
        if not isinstance(doc, dict):
            raise ConfigError(f"{path}: top level must be a mapping")
    try:
        scenario = Scenario.model_validate(doc)
    except ValidationError as exc:
        raise ConfigError(_format_errors(exc, root)) from None
    if scenario.kind is not None and scenario.kind != kind:
        raise ConfigError(f"config kind {scenario.kind!r} does not match subcommand {kind!r}")
    params = validate_params(kind, scenario.params, root)
    return scenario, params
