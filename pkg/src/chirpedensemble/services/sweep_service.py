"""Harness runs: fidelity curves over an alpha list, concatenated controls and
eps1 scaling. Every job is independent; results are merged in run-id order so
the output does not depend on the worker count.
"""

import dataclasses
import logging
import time
from dataclasses import dataclass
from typing import List, Optional, Tuple, Union

import numpy as np
from joblib import Parallel, delayed

from chirpedensemble.config import settings
from chirpedensemble.core.conditions import check_theorem1
from chirpedensemble.core.control import Control, concat
from chirpedensemble.core.model import EnsembleSystem, ParamBox, sample_system
from chirpedensemble.core.propagator import (
    Trajectory,
    basis_state,
    fidelity,
    propagate,
)
from chirpedensemble.exceptions import ArgumentError
from chirpedensemble.schemas.condition_schemas import ConditionReport
from chirpedensemble.schemas.config_schemas import RunConfig
from chirpedensemble.schemas.record_schemas import (
    FidelityCurve,
    PopulationCurves,
    RunResult,
    ScalingFit,
    SweepRecord,
    distance_from_fidelity,
)
from chirpedensemble.services.config_loader import (
    control_from_config,
    ensemble_from_config,
    pulses_from_config,
    resolve_eps1,
)
from chirpedensemble.utils.fitting import fit_loglog_slope, is_geometric

logger = logging.getLogger(__name__)

DeltaChoice = Union[float, List[List[float]]]
# Floor for log10(1 - fid) once the fidelity reaches 1 to machine precision
LOG_FLOOR = 1e-16


@dataclass(frozen=True)
class Resolution:
    """Numerical knobs shared by every job of a run."""

    steps_per_period: int
    n_samples: int
    drift_tolerance: float
    workers: int

    @classmethod
    def from_config(
        cls,
        config: RunConfig,
        steps_per_period: Optional[int] = None,
        n_samples: Optional[int] = None,
        workers: Optional[int] = None,
    ) -> "Resolution":
        """CLI value, then config value, then the Settings default."""
        run = config.run

        def pick(cli, cfg, default):
            return cli if cli is not None else (cfg if cfg is not None else default)

        return cls(
            steps_per_period=pick(steps_per_period, run.steps_per_period, settings.DEFAULT_STEPS_PER_PERIOD),
            n_samples=pick(n_samples, run.n_samples, settings.DEFAULT_N_SAMPLES),
            drift_tolerance=settings.NORM_DRIFT_TOLERANCE,
            workers=pick(workers, run.workers, settings.DEFAULT_WORKERS),
        )


@dataclass(frozen=True)
class Job:
    run_id: str
    kind: str
    alpha: List[float]
    delta_choice: DeltaChoice
    eps1: float
    eps2: float


def draw_delta_choices(config: RunConfig, count: int) -> List[List[DeltaChoice]]:
    """Per-alpha coupling selections; drawn once, up front, from the configured seed."""
    run = config.run
    if run.delta_samples == 0:
        return [[run.delta_choice] for _ in range(count)]
    rng = np.random.default_rng(run.seed)
    n = config.system.n
    return [
        [rng.uniform(0.0, 1.0, size=(n, n)).tolist() for _ in range(run.delta_samples)]
        for _ in range(count)
    ]


def build_jobs(config: RunConfig, kind: str, eps_pairs: List[Tuple[float, float]]) -> List[Job]:
    alphas = config.system.alpha_list()
    choices = draw_delta_choices(config, len(alphas))
    jobs = []
    for eps1, eps2 in eps_pairs:
        for alpha, alpha_choices in zip(alphas, choices):
            for choice in alpha_choices:
                jobs.append(Job(f"{kind}-{len(jobs):04d}", kind, alpha, choice, eps1, eps2))
    return jobs


def _record(job: Job, traj: Trajectory, q: int, wall_time: float) -> SweepRecord:
    # Norm drift may push |psi_q|^2 marginally above 1
    fid = min(float(abs(traj.final_state[q - 1]) ** 2), 1.0)
    return SweepRecord(
        run_id=job.run_id,
        kind=job.kind,
        alpha=job.alpha,
        delta_choice=job.delta_choice,
        eps1=job.eps1,
        eps2=job.eps2,
        fidelity=fid,
        distance=distance_from_fidelity(fid),
        norm_drift=traj.max_norm_drift,
        degraded=traj.degraded,
        wall_time=wall_time,
    )


def _curve(job: Job, traj: Trajectory, q: int) -> FidelityCurve:
    fid = fidelity(traj, q)
    overlap = np.sqrt(np.clip(fid, 0.0, 1.0))
    return FidelityCurve(
        run_id=job.run_id,
        alpha=job.alpha,
        eps1=job.eps1,
        eps2=job.eps2,
        s=traj.slow_times.tolist(),
        fid=fid.tolist(),
        log10_one_minus_fid=np.log10(np.clip(1.0 - fid, LOG_FLOOR, None)).tolist(),
        distance=np.sqrt(np.clip(2.0 - 2.0 * overlap, 0.0, None)).tolist(),
        norm_drift=np.abs(traj.norms() - 1.0).tolist(),
    )


def _propagate_job(config: RunConfig, job: Job, resolution: Resolution, segmented: bool) -> Trajectory:
    sys = sample_system(ensemble_from_config(config), job.alpha, job.delta_choice)
    if segmented:
        control: Control = concat(pulses_from_config(config, job.eps1, job.eps2))
    else:
        control = control_from_config(config, job.eps1, job.eps2)
    return propagate(
        sys,
        control,
        basis_state(sys.n, config.run.start_level),
        steps_per_period=resolution.steps_per_period,
        n_samples=resolution.n_samples,
        drift_tolerance=resolution.drift_tolerance,
    )


def run_job(
    config: RunConfig, job: Job, resolution: Resolution
) -> Tuple[SweepRecord, FidelityCurve, Trajectory]:
    """Propagates one job; this is what the workers execute."""
    started = time.perf_counter()
    traj = _propagate_job(config, job, resolution, segmented=False)
    elapsed = time.perf_counter() - started
    q = config.run.q
    logger.info(
        f"{job.run_id}: alpha={job.alpha}, eps1={job.eps1:.4g}, eps2={job.eps2:.4g}, "
        f"fid={abs(traj.final_state[q - 1]) ** 2:.6f} in {elapsed:.1f}s."
    )
    return _record(job, traj, q, elapsed), _curve(job, traj, q), traj


def run_concat_job(
    config: RunConfig, job: Job, resolution: Resolution
) -> Tuple[SweepRecord, PopulationCurves]:
    started = time.perf_counter()
    traj = _propagate_job(config, job, resolution, segmented=True)
    elapsed = time.perf_counter() - started
    control = concat(pulses_from_config(config, job.eps1, job.eps2))
    populations = PopulationCurves(
        run_id=job.run_id,
        alpha=job.alpha,
        eps1=job.eps1,
        eps2=job.eps2,
        s=traj.slow_times.tolist(),
        populations=traj.populations().T.tolist(),
        breakpoints=control.slow_breakpoints.tolist(),
        degraded=traj.degraded,
    )
    logger.info(f"{job.run_id}: concatenated run over {len(control.segments)} segment(s) in {elapsed:.1f}s.")
    return _record(job, traj, config.run.q, elapsed), populations


def _execute(func, config: RunConfig, jobs: List[Job], resolution: Resolution) -> list:
    logger.info(f"Running {len(jobs)} job(s) on {resolution.workers} worker(s).")
    if resolution.workers == 1:
        outputs = [func(config, job, resolution) for job in jobs]
    else:
        outputs = Parallel(n_jobs=resolution.workers)(
            delayed(func)(config, job, resolution) for job in jobs
        )
    return sorted(outputs, key=lambda out: out[0].run_id)


def point_reports(config: RunConfig, ens: EnsembleSystem) -> List[ConditionReport]:
    """One gap-condition report per configured alpha, for each segment with a target pair."""
    reports = []
    pulses = pulses_from_config(config, resolve_eps1(config), config.run.eps2_for(resolve_eps1(config)))
    targets = [
        (seg.p, seg.q) if seg.p is not None else (config.run.p, config.run.q)
        for seg in config.pulse.segments
    ]
    for alpha in config.system.alpha_list():
        point = dataclasses.replace(ens, box=ParamBox.point(alpha))
        for pulse, (p, q) in zip(pulses, targets):
            reports.append(check_theorem1(point, p, q, pulse.v0, pulse.v1))
    return reports


def run_fid_curves(
    config: RunConfig, resolution: Resolution, eps1: Optional[float] = None
) -> RunResult:
    """fid(s) for every configured alpha (and coupling draw) at one (eps1, eps2)."""
    eps1 = resolve_eps1(config, eps1)
    eps2 = config.run.eps2_for(eps1)
    reports = point_reports(config, ensemble_from_config(config))
    per_alpha = len(config.pulse.segments)
    for index, alpha in enumerate(config.system.alpha_list()):
        if not all(r.holds for r in reports[index * per_alpha : (index + 1) * per_alpha]):
            logger.warning(f"alpha={alpha} violates the gap conditions; simulating it anyway.")
    jobs = build_jobs(config, "sweep", [(eps1, eps2)])
    outputs = _execute(run_job, config, jobs, resolution)
    return RunResult(
        kind="sweep",
        records=[out[0] for out in outputs],
        curves=[out[1] for out in outputs],
        conditions=reports,
    )


def run_simulate(
    config: RunConfig, resolution: Resolution, eps1: Optional[float] = None
) -> Tuple[RunResult, Trajectory]:
    """A single run at the first configured alpha; also returns the trajectory."""
    eps1 = resolve_eps1(config, eps1)
    job = Job(
        "simulate-0000",
        "simulate",
        config.system.alpha_list()[0],
        config.run.delta_choice,
        eps1,
        config.run.eps2_for(eps1),
    )
    record, curve, traj = run_job(config, job, resolution)
    reports = point_reports(config, ensemble_from_config(config))[: len(config.pulse.segments)]
    return RunResult(kind="simulate", records=[record], curves=[curve], conditions=reports), traj


def run_concat(config: RunConfig, resolution: Resolution, eps1: Optional[float] = None) -> RunResult:
    """Populations of every level under the concatenation of all configured segments."""
    eps1 = resolve_eps1(config, eps1)
    jobs = build_jobs(config, "concat", [(eps1, config.run.eps2_for(eps1))])
    outputs = _execute(run_concat_job, config, jobs, resolution)
    return RunResult(
        kind="concat",
        records=[out[0] for out in outputs],
        populations=[out[1] for out in outputs],
        conditions=point_reports(config, ensemble_from_config(config)),
    )


def run_scaling(config: RunConfig, resolution: Resolution) -> RunResult:
    """Final distances along eps1_list (eps2 from the coupling rule) and their log-log slope."""
    eps1_list = list(config.run.eps1_list)
    if len(eps1_list) < 2:
        raise ArgumentError(f"Scaling needs at least two eps1 values, got {len(eps1_list)}.")
    if len(eps1_list) < 3:
        logger.warning("Fewer than three eps1 values: the fitted slope is flagged unreliable.")
    if not is_geometric(eps1_list):
        logger.warning(f"eps1_list {eps1_list} is not geometric.")

    alpha = config.system.alpha_list()[0]
    jobs = [
        Job(f"scaling-{i:04d}", "scaling", alpha, config.run.delta_choice, e, config.run.eps2_for(e))
        for i, e in enumerate(eps1_list)
    ]
    outputs = _execute(run_job, config, jobs, resolution)
    records = [out[0] for out in outputs]

    distances = [r.distance for r in records]
    degraded = any(r.degraded for r in records)
    if min(distances) <= 0.0:
        logger.warning("A final distance is exactly zero; slope fitted on the positive part only.")
    positive = [(r.eps1, r.distance) for r in records if r.distance > 0.0]
    fit = None
    if len(positive) >= 2:
        loglog = fit_loglog_slope([p[0] for p in positive], [p[1] for p in positive])
        fit = ScalingFit(
            slope=loglog.slope,
            intercept=loglog.intercept,
            residual=loglog.residual,
            reliable=not degraded and len(positive) >= 3,
            kappa=config.run.kappa,
        )
        logger.info(f"Scaling slope {fit.slope:.4f} (RMS residual {fit.residual:.2e}, reliable={fit.reliable}).")
    return RunResult(
        kind="scaling",
        records=records,
        curves=[out[1] for out in outputs],
        fit=fit,
    )
