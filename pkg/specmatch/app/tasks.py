"""Sweep trials and the worker pool that runs them"""
import concurrent.futures
import logging
import time
from typing import Dict, List, Optional, Tuple

import numpy as np

from app.config import settings
from app.exceptions import ConfigError
from app.models import gen_er_pair, gen_gaussian_pair
from app.pipeline import MatchingPipeline
from app.schemas import CorrelatedPair, ExperimentConfig, SweepResult, SweepSummary, TrialRecord

logger = logging.getLogger(__name__)

MASK64 = (1 << 64) - 1


def splitmix64(x: int) -> int:
    """One splitmix64 output step for state x"""
    z = (x + 0x9E3779B97F4A7C15) & MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def derive_seed(base_seed: int, noise_index: int, rep: int) -> int:
    """Per-trial seed; every method and rounder of a repetition shares it"""
    return (base_seed ^ splitmix64(splitmix64(noise_index) ^ rep)) & MASK64


def resolve_workers(cli_workers: Optional[int], config: ExperimentConfig) -> int:
    """CLI flag, then SPECMATCH_WORKERS, then the config file"""
    for source, value in (("--workers", cli_workers), ("SPECMATCH_WORKERS", settings.WORKERS)):
        if value is not None:
            if value < 1:
                raise ConfigError(f"{source} must be at least 1, got {value}")
            return value
    return config.workers


def generate_instance(config: ExperimentConfig, noise_index: int, rep: int) -> CorrelatedPair:
    noise = config.noise_grid[noise_index]
    seed = derive_seed(config.base_seed, noise_index, rep)
    if config.model == "gaussian":
        return gen_gaussian_pair(config.n, noise, seed, truth_mode=config.truth_mode)
    return gen_er_pair(config.n, config.p, noise, seed, truth_mode=config.truth_mode)


def run_trial(config: ExperimentConfig, noise_index: int, rep: int, timing: bool = False) -> List[TrialRecord]:
    """All (method, rounder) records for one generated instance, in canonical order"""
    pair = generate_instance(config, noise_index, rep)
    # sigma_emp exceeds 1 once s < p; the diagonal prediction is then zero
    sigma = min(pair.sigma_emp, 1.0)
    records = []
    for method in config.methods:
        pipeline = MatchingPipeline(method=method, eta=config.eta)
        start_time = time.perf_counter()
        x = pipeline.similarity(pair.a, pair.b)
        similarity_s = time.perf_counter() - start_time

        for rounder in config.rounders:
            start_time = time.perf_counter()
            matching = pipeline.round(x, rounder)
            elapsed_s = similarity_s + time.perf_counter() - start_time
            report = pipeline.report(pair.a, pair.b, x, matching, truth=pair.truth, sigma=sigma)
            dominance = report.dominance
            records.append(TrialRecord(
                method=method,
                rounder=rounder,
                n=config.n,
                p=config.p if config.model == "erdos_renyi" else None,
                noise=config.noise_grid[noise_index],
                sigma_emp=pair.sigma_emp,
                eta=config.eta,
                rep=rep,
                seed=pair.seed,
                overlap=report.overlap,
                min_true=dominance.min_true,
                max_off=dominance.max_off,
                margin=dominance.margin,
                diag_rel_err=dominance.diag_rel_err,
                separated=dominance.separated,
                runtime_ms=int(round(elapsed_s * 1000)) if timing else 0,
            ))
    return records


def summarize(config: ExperimentConfig, records: List[TrialRecord]) -> List[SweepSummary]:
    """Mean and sample std of overlap per (noise, method, rounder), in canonical order"""
    cells: Dict[Tuple[float, str, str], List[TrialRecord]] = {}
    for record in records:
        cells.setdefault((record.noise, record.method, record.rounder), []).append(record)

    summaries = []
    for noise in dict.fromkeys(config.noise_grid):
        for method in config.methods:
            for rounder in config.rounders:
                cell = cells.get((noise, method, rounder))
                if not cell:
                    continue
                overlaps = np.array([r.overlap for r in cell])
                std = float(np.std(overlaps, ddof=1)) if overlaps.size > 1 else 0.0
                summaries.append(SweepSummary(
                    method=method,
                    rounder=rounder,
                    n=config.n,
                    p=cell[0].p,
                    noise=noise,
                    sigma_emp=cell[0].sigma_emp,
                    eta=config.eta,
                    mean_overlap=float(np.mean(overlaps)),
                    std_overlap=std,
                    reps=int(overlaps.size),
                ))
    return summaries


def run_sweep(config: ExperimentConfig, workers: int = 1, timing: bool = False) -> SweepResult:
    """
    Run every (noise, rep) trial on a bounded thread pool.
    Output order is canonical regardless of worker count; an interrupt
    returns the trials completed so far with complete=False.
    """
    tasks = [(k, rep) for k in range(len(config.noise_grid)) for rep in range(config.reps)]
    results: Dict[Tuple[int, int], List[TrialRecord]] = {}
    complete = True
    logger.info("sweep: %d trials on %d worker(s)", len(tasks), workers)

    executor = concurrent.futures.ThreadPoolExecutor(max_workers=workers)
    try:
        futures = {executor.submit(run_trial, config, k, rep, timing): (k, rep) for k, rep in tasks}
        for future in concurrent.futures.as_completed(futures):
            results[futures[future]] = future.result()
    except KeyboardInterrupt:
        complete = False
        logger.warning("sweep interrupted after %d of %d trials", len(results), len(tasks))
    finally:
        executor.shutdown(wait=complete, cancel_futures=not complete)

    records = [record for key in tasks if key in results for record in results[key]]
    return SweepResult(records=records, summaries=summarize(config, records), complete=complete)
