"""Parameter sweeps over a scenario file and their CSV form."""

import csv
import io
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional, Tuple, Union

from crnase import osa, sensing, spectrum_sharing
from crnase.channel.rayleigh import RayleighChannel
from crnase.config import ScenarioConfig
from crnase.core import CrnError, CrnType, GridPointError
from crnase.io.base import BaseCrnIO, PredefinedLoggerCrnIO
from crnase.modulation import ModulationScheme
from crnase.osa import OsaScenario
from crnase.sensing import SensingConfig, SensingScenario
from crnase.spectrum_sharing import SsScenario
from crnase.utils import db_to_linear, format_number

ASE_HEADER = (
    "x_db",
    "ase_bps_hz",
    "cutoff_linear",
    "band_factor_gain",
    "throughput_bps_hz",
    "truncated_fraction",
)
POLICY_HEADER = ("x_db", "power_ratio", "cutoff_linear")

Scenario = Union[OsaScenario, SsScenario, SensingScenario]


@dataclass(frozen=True)
class SweepRow:
    x_db: float
    ase: float
    cutoff: float
    band_factor_gain: Optional[float] = None
    throughput: Optional[float] = None
    truncated_fraction: Optional[float] = None

    def values(self) -> Tuple[Optional[float], ...]:
        return (
            self.x_db,
            self.ase,
            self.cutoff,
            self.band_factor_gain,
            self.throughput,
            self.truncated_fraction,
        )


@dataclass(frozen=True)
class PolicyRow:
    x_db: float
    power_ratio: float
    cutoff: float

    def values(self) -> Tuple[Optional[float], ...]:
        return (self.x_db, self.power_ratio, self.cutoff)


@dataclass
class SweepResult:
    mode: str = "ase"
    rows: List[Union[SweepRow, PolicyRow]] = field(default_factory=list)

    @property
    def header(self) -> Tuple[str, ...]:
        return POLICY_HEADER if self.mode == "policy" else ASE_HEADER

    def column(self, name: str) -> List[Optional[float]]:
        index = self.header.index(name)
        return [row.values()[index] for row in self.rows]


def build_scenario(cfg: ScenarioConfig, x_db: Optional[float] = None) -> Scenario:
    """Scenario of one grid point; ``x_db`` replaces the swept variable."""
    variable = cfg.sweep.variable
    gamma_bar_db = cfg.channel.gamma_bar_db
    i_pk_db = cfg.channel.i_pk_db
    if x_db is not None and variable == "gamma_bar":
        gamma_bar_db = x_db
    if x_db is not None and variable == "i_pk":
        i_pk_db = x_db

    scheme = ModulationScheme.from_name(cfg.scenario.scheme, cfg.scenario.ber)
    if cfg.crn_type is CrnType.OSA:
        return OsaScenario(RayleighChannel.from_db(gamma_bar_db), scheme, cfg.scenario.users)

    gamma_bar_sp_db = gamma_bar_db if cfg.channel.tie_sp_to_ss else cfg.channel.gamma_bar_sp_db
    ss = SsScenario(
        link_ss=RayleighChannel.from_db(gamma_bar_db),
        link_sp=RayleighChannel.from_db(gamma_bar_sp_db),
        i_pk=db_to_linear(i_pk_db),
        scheme=scheme,
        rate_model=cfg.scenario.rate_model,
    )
    if cfg.crn_type is CrnType.SS:
        return ss

    section = cfg.sensing
    sensing_config = SensingConfig(
        tau=section.tau_ms * 1e-3,
        frame=section.frame_ms * 1e-3,
        pi0=section.pi0,
        pi1=section.pi1,
        sensed_snr=db_to_linear(section.sensed_snr_db),
        fs=section.fs_hz,
        eta_norm=section.eta_norm,
        detection=section.detection,
        sigma_n=section.sigma_n,
    )
    return SensingScenario(ss, sensing_config)


def solve_scenario(scn: Scenario):
    if isinstance(scn, OsaScenario):
        return osa.solve_cutoff(scn)
    if isinstance(scn, SsScenario):
        return spectrum_sharing.solve_cutoff_ss(scn)
    return sensing.solve_common_cutoff(scn)


def evaluate_point(cfg: ScenarioConfig, x_db: float) -> SweepRow:
    scn = build_scenario(cfg, x_db)
    sol = solve_scenario(scn)

    if isinstance(scn, OsaScenario):
        delta = osa.band_factor_gain(scn, sol)
        se_1 = osa.ase(scn, sol)
        return SweepRow(
            x_db, osa.sum_ase(se_1, delta, scn.users), sol.cutoff, band_factor_gain=delta
        )

    if isinstance(scn, SsScenario):
        return SweepRow(
            x_db,
            spectrum_sharing.ase_ss(scn, sol),
            sol.cutoff,
            truncated_fraction=spectrum_sharing.truncated_fraction(scn, sol),
        )

    ase = sensing.sensing_ase(scn, sol)
    return SweepRow(
        x_db,
        ase,
        sol.cutoff,
        throughput=sensing.throughput(scn.config, ase),
        truncated_fraction=spectrum_sharing.truncated_fraction(scn.ss, sol),
    )


def policy_rows(cfg: ScenarioConfig) -> List[PolicyRow]:
    """Average power ratio against the instantaneous secondary-link SNR at fixed mean SNR."""
    scn = build_scenario(cfg)
    sol = solve_scenario(scn)
    rows = []
    for x_db in cfg.sweep.grid():
        gamma = db_to_linear(x_db)
        if isinstance(scn, OsaScenario):
            power = float(osa.power_policy(scn, sol, gamma))
        elif isinstance(scn, SsScenario):
            power = spectrum_sharing.mean_power_given_ss(scn, sol.cutoff, gamma)
        else:
            power = sensing.mean_power_given_ss_sensing(scn, sol.cutoff, gamma)
        rows.append(PolicyRow(x_db, power, sol.cutoff))
    return rows


def run_sweep(
    cfg: ScenarioConfig, stdio: Optional[BaseCrnIO] = None, jobs: int = 1
) -> SweepResult:
    stdio = stdio or PredefinedLoggerCrnIO(__name__)
    grid = cfg.sweep.grid()
    stdio.log_info(
        f"{cfg.crn_type.value} {cfg.scenario.scheme} sweep over {cfg.sweep.variable}: "
        f"{len(grid)} points from {grid[0]} to {grid[-1]} dB"
    )

    if cfg.sweep.mode == "policy":
        try:
            return SweepResult("policy", policy_rows(cfg))
        except CrnError as exc:
            raise GridPointError(cfg.channel.gamma_bar_db, exc) from exc

    rows: List[Union[SweepRow, PolicyRow]] = []
    if jobs > 1 and len(grid) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as executor:
            futures = [executor.submit(evaluate_point, cfg, x_db) for x_db in grid]
            for x_db, future in zip(grid, futures):
                try:
                    rows.append(future.result())
                except CrnError as exc:
                    raise GridPointError(x_db, exc) from exc
                stdio.log_debug(f"x = {x_db} dB done")
    else:
        for x_db in grid:
            try:
                rows.append(evaluate_point(cfg, x_db))
            except CrnError as exc:
                raise GridPointError(x_db, exc) from exc
            stdio.log_debug(f"x = {x_db} dB: {rows[-1]}")
    return SweepResult("ase", rows)


def format_csv(result: SweepResult) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(result.header)
    for row in result.rows:
        writer.writerow([format_number(value) for value in row.values()])
    return buffer.getvalue()


def emit_csv(
    result: SweepResult,
    path: Union[str, Path, None] = None,
    stdio: Optional[BaseCrnIO] = None,
):
    """Write the CSV to ``path``, or hand it to ``stdio`` as user output."""
    text = format_csv(result)
    if path is None:
        (stdio or PredefinedLoggerCrnIO(__name__)).user_info_text(text)
        return
    with open(path, "w", encoding="utf-8", newline="") as fp:
        fp.write(text)
