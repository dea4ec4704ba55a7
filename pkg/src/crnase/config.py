"""Scenario files.

A scenario is an INI file with ``[scenario]``, ``[channel]``, ``[sensing]`` and
``[sweep]`` sections. Values in dB stay in dB here; they are converted to linear
units when the scenario objects are built. Unknown sections or keys are errors.
"""

import configparser
import math
from importlib import resources
from pathlib import Path
from typing import List, Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from crnase.core import ConfigValidationError, CrnType, ParseError, RateModel

PRESET_PACKAGE = "crnase.presets"
# figure-numbered aliases of the bundled files
PRESET_ALIASES = {
    "fig3": "osa_cr",
    "fig4a": "osa_dr5",
    "fig4b": "osa_dr5_strict",
    "fig5": "osa_cr_strict",
    "fig6": "ss_cr",
    "fig7": "ss_dr5",
    "fig8a": "osa_cr_policy_0db",
    "fig8b": "osa_cr_policy_5db",
    "fig8c": "osa_cr_policy_15db",
    "fig9a": "sensing_cr",
    "fig9b": "sensing_dr5",
    "fig10a": "sensing_cr_policy",
    "fig10b": "sensing_dr5_policy",
}
GRID_SLACK = 1e-9
GRID_DECIMALS = 9


class StrictSection(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class ScenarioSection(StrictSection):
    crn_type: CrnType
    scheme: Literal["cr", "dr3", "dr4", "dr5"]
    ber: float = Field(gt=0, lt=0.2)
    users: int = Field(default=1, ge=1)
    rate_model: RateModel = RateModel.ACHIEVED
    seed: int = 0


class ChannelSection(StrictSection):
    gamma_bar_db: float = 0.0
    gamma_bar_sp_db: float = 0.0
    tie_sp_to_ss: bool = False
    i_pk_db: Optional[float] = None


class SensingSection(StrictSection):
    tau_ms: float = Field(gt=0)
    frame_ms: float = Field(gt=0)
    pi0: float = Field(ge=0, le=1)
    pi1: Optional[float] = Field(default=None, ge=0, le=1)
    detection: Optional[float] = Field(default=None, gt=0, lt=1)
    eta_norm: Optional[float] = None
    fs_hz: float = Field(default=6e6, gt=0)
    sensed_snr_db: float = -15.0
    sigma_n: float = Field(default=1.0, gt=0)

    @model_validator(mode="before")
    @classmethod
    def infer_pi1(cls, data):
        if isinstance(data, dict) and data.get("pi1") is None and "pi0" in data:
            try:
                return {**data, "pi1": 1.0 - float(data["pi0"])}
            except (TypeError, ValueError):
                pass
        return data

    @model_validator(mode="after")
    def check_consistency(self) -> "SensingSection":
        if self.tau_ms >= self.frame_ms:
            raise ValueError("tau_ms must be shorter than frame_ms")
        if self.pi1 is not None and abs(self.pi0 + self.pi1 - 1.0) > 1e-9:
            raise ValueError("pi0 + pi1 must equal 1")
        if (self.detection is None) == (self.eta_norm is None):
            raise ValueError("give exactly one of detection and eta_norm")
        return self


class SweepSection(StrictSection):
    mode: Literal["ase", "policy"] = "ase"
    variable: Literal["gamma_bar", "i_pk", "gamma"] = "gamma_bar"
    start_db: float
    stop_db: float
    step_db: float = Field(gt=0)

    @model_validator(mode="after")
    def check_range(self) -> "SweepSection":
        if self.stop_db < self.start_db:
            raise ValueError("stop_db must not be below start_db")
        if (self.mode == "policy") != (self.variable == "gamma"):
            raise ValueError("policy sweeps run over gamma and only over gamma")
        return self

    @property
    def points(self) -> int:
        return math.floor((self.stop_db - self.start_db) / self.step_db + GRID_SLACK) + 1

    def grid(self) -> List[float]:
        # + 0.0 turns -0.0 into 0.0
        return [
            round(self.start_db + i * self.step_db, GRID_DECIMALS) + 0.0
            for i in range(self.points)
        ]


class ScenarioConfig(StrictSection):
    scenario: ScenarioSection
    channel: ChannelSection = ChannelSection()
    sensing: Optional[SensingSection] = None
    sweep: SweepSection

    @model_validator(mode="after")
    def check_crn_type(self) -> "ScenarioConfig":
        crn_type = self.scenario.crn_type
        if crn_type is CrnType.OSA:
            if self.sweep.variable == "i_pk":
                raise ValueError("an OSA scenario has no interference constraint to sweep")
            if self.sensing is not None:
                raise ValueError("an OSA scenario takes no [sensing] section")
        else:
            if self.channel.i_pk_db is None and self.sweep.variable != "i_pk":
                raise ValueError("channel.i_pk_db is required for shared-band scenarios")
        if crn_type is CrnType.SENSING and self.sensing is None:
            raise ValueError("a sensing scenario needs a [sensing] section")
        if crn_type is CrnType.SS and self.sensing is not None:
            raise ValueError("an SS scenario takes no [sensing] section")
        return self

    @property
    def crn_type(self) -> CrnType:
        return self.scenario.crn_type


def _read_sections(text: str, source: str) -> dict:
    parser = configparser.ConfigParser(
        interpolation=None, inline_comment_prefixes=(";", "#"), strict=True
    )
    try:
        parser.read_string(text, source=source)
    except configparser.MissingSectionHeaderError as exc:
        raise ParseError(f"{source}: key outside of any [section]", exc.lineno) from exc
    except configparser.ParsingError as exc:
        lineno, line = exc.errors[0]
        raise ParseError(f"{source}: cannot parse {line.strip()!r}", lineno) from exc
    except (configparser.DuplicateSectionError, configparser.DuplicateOptionError) as exc:
        raise ParseError(f"{source}: {exc.message}", exc.lineno) from exc
    except configparser.Error as exc:
        raise ParseError(f"{source}: {exc}") from exc

    if parser.defaults():
        raise ConfigValidationError("DEFAULT", "the [DEFAULT] section is not supported")
    return {name: dict(parser.items(name, raw=True)) for name in parser.sections()}


def parse_config_text(text: str, source: str = "<string>") -> ScenarioConfig:
    sections = _read_sections(text, source)
    try:
        return ScenarioConfig.model_validate(sections)
    except ValidationError as exc:
        error = exc.errors()[0]
        field = ".".join(str(part) for part in error["loc"]) or "scenario file"
        raise ConfigValidationError(field, error["msg"]) from exc


def parse_config(path: Union[str, Path]) -> ScenarioConfig:
    path = Path(path)
    return parse_config_text(path.read_text(encoding="utf-8"), source=str(path))


def list_presets() -> List[str]:
    return sorted(
        entry.name[: -len(".ini")]
        for entry in resources.files(PRESET_PACKAGE).iterdir()
        if entry.name.endswith(".ini")
    )


def load_preset_text(name: str) -> str:
    """Text of a bundled preset, by file name or by its figure alias."""
    name = PRESET_ALIASES.get(name, name)
    if name not in list_presets():
        raise ConfigValidationError(
            "preset", f"unknown preset {name!r}; available: {', '.join(list_presets())}"
        )
    return resources.files(PRESET_PACKAGE).joinpath(f"{name}.ini").read_text(encoding="utf-8")


def load_preset(name: str) -> ScenarioConfig:
    return parse_config_text(load_preset_text(name), source=f"preset {name}")
