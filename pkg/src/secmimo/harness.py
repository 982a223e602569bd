"""Trial scheduling, operating points, sweeps and CSV output.

A trial is fully determined by ``(config, root seed, trial index)``.  Trials
may run in worker processes; results are always reassembled in trial order,
so the output does not depend on the worker count.

Grid points of a sweep share the root seed (common random numbers), so a
trend across the grid is not masked by independent Monte Carlo noise.  The
uplink does not depend on the downlink power, so an SNR sweep simulates its
trials once and re-evaluates them at every SNR.
"""

from __future__ import annotations

import csv
import io
import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .asymptotics import AsymptoticReport, asymptotic_rate
from .config import SystemConfig, db_to_linear, order_powers, validate_config
from .downlink import (GainSamples, SecrecyReport, build_precoders,
                       compute_gains, estimate_eve_capacity, estimate_sinr,
                       secrecy_report)
from .estimator import estimate_cell, subspace_alignment
from .mfan import (DEFAULT_PHIS, MfanSamples, best_phi_report,
                   conventional_estimate, mfan_trial, stack_mfan)
from .signals import (assemble_uplink, build_attack, build_pilots,
                      sample_channels, trial_seed)

__all__ = [
    "SCHEMA_VERSION",
    "CSV_COLUMNS",
    "SCHEMES",
    "AXES",
    "TrialOutcome",
    "TrialBatch",
    "PointResult",
    "SweepSpec",
    "SweepResult",
    "run_trial",
    "run_trials",
    "proposed_report",
    "run_point",
    "run_sweep",
    "point_rows",
    "write_csv",
    "rows_to_csv",
]

log = logging.getLogger(__name__)

SCHEMA_VERSION = 1
CSV_COLUMNS = ("axis", "axis_value", "scheme", "k", "rate_bits", "c_eve_bits",
               "secrecy_bits", "sum_secrecy_bits", "stderr", "sum_stderr",
               "phi", "trials", "seed", "schema_version")
SCHEMES = ("proposed", "asymptotic", "mfan")
AXES = ("snr", "rho", "T", "Nt")


@dataclass(frozen=True, eq=False)
class TrialOutcome:
    """Everything retained from one trial.

    ``gains`` are evaluated at unit downlink power.  Diagnostics refer to
    BS 0: ``hhat_norm2[k]`` is ``||h_hat_0k||^2``, ``align_desired[k]`` and
    ``align_eve[j]`` the fraction of user ``k``'s channel and of eavesdropper
    antenna ``j``'s channel inside the selected subspace, ``top_eigs`` the
    ``M + 1`` largest Gram eigenvalues in ascending order.
    """

    gains: GainSamples
    hhat_norm2: np.ndarray
    align_desired: np.ndarray
    align_eve: np.ndarray
    top_eigs: np.ndarray
    mfan: MfanSamples | None = None


def run_trial(cfg: SystemConfig, seed: int, trial: int,
              mfan: bool = False) -> TrialOutcome:
    ss = trial_seed(seed, trial)
    channels = sample_channels(cfg, ss)
    pilots = build_pilots(cfg.K, cfg.tau)
    attack = build_attack(cfg, pilots, ss)

    estimates, conventional = [], []
    eig0 = None
    for bs in range(cfg.L + 1):
        obs = assemble_uplink(cfg, channels, pilots, attack, ss, bs=bs)
        est, eig = estimate_cell(cfg, obs, pilots, order_powers(cfg, bs))
        estimates.append(est)
        if bs == 0:
            eig0 = eig
        if mfan:
            conventional.append(conventional_estimate(
                obs.Yp, pilots, cfg.cell_powers[bs], cfg.tau))

    gains = compute_gains(channels, build_precoders(estimates), 1.0)
    V0 = estimates[0].V_eq
    align_d = np.array([subspace_alignment(V0, channels.h[0, k, 0])
                        for k in range(cfg.K)])
    align_e = np.array([subspace_alignment(V0, channels.He[0][:, j])
                        for j in range(cfg.N_e)])
    return TrialOutcome(
        gains=gains,
        hhat_norm2=np.sum(np.abs(estimates[0].h_hat) ** 2, axis=1),
        align_desired=align_d,
        align_eve=align_e,
        top_eigs=eig0.eigenvalues[-(cfg.M + 1):].copy(),
        mfan=mfan_trial(channels, conventional) if mfan else None,
    )


@dataclass(frozen=True, eq=False)
class TrialBatch:
    """Trial outcomes stacked along axis 0, in trial order."""

    gains: GainSamples
    hhat_norm2: np.ndarray
    align_desired: np.ndarray
    align_eve: np.ndarray
    top_eigs: np.ndarray
    mfan: MfanSamples | None
    seed: int

    @property
    def trials(self) -> int:
        return self.hhat_norm2.shape[0]

    def head(self, n: int) -> "TrialBatch":
        """The first ``n`` trials, identical to a fresh ``n``-trial run."""
        if not 1 <= n <= self.trials:
            raise ValueError(f"cannot take {n} of {self.trials} trials")
        mf = None
        if self.mfan is not None:
            mf = MfanSamples(*(getattr(self.mfan, f)[:n] for f in
                               ("g", "an_user", "eve_signal", "eve_an")))
        return TrialBatch(
            gains=GainSamples(g=self.gains.g[:n], g_eve=self.gains.g_eve[:n]),
            hhat_norm2=self.hhat_norm2[:n], align_desired=self.align_desired[:n],
            align_eve=self.align_eve[:n], top_eigs=self.top_eigs[:n],
            mfan=mf, seed=self.seed)


def _run_chunk(args):
    cfg, seed, start, stop, mfan = args
    return [run_trial(cfg, seed, i, mfan) for i in range(start, stop)]


def run_trials(cfg: SystemConfig, trials: int, seed: int, workers: int = 1,
               mfan: bool = False) -> TrialBatch:
    if trials < 1:
        raise ValueError("trials must be positive")
    workers = max(1, int(workers))
    if workers == 1:
        outcomes = _run_chunk((cfg, seed, 0, trials, mfan))
    else:
        bounds = np.linspace(0, trials, min(workers, trials) * 4 + 1).astype(int)
        jobs = [(cfg, seed, a, b, mfan)
                for a, b in zip(bounds[:-1], bounds[1:]) if b > a]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            outcomes = [o for chunk in pool.map(_run_chunk, jobs) for o in chunk]
    return TrialBatch(
        gains=GainSamples(g=np.stack([o.gains.g for o in outcomes]),
                          g_eve=np.stack([o.gains.g_eve for o in outcomes])),
        hhat_norm2=np.stack([o.hhat_norm2 for o in outcomes]),
        align_desired=np.stack([o.align_desired for o in outcomes]),
        align_eve=np.stack([o.align_eve for o in outcomes]),
        top_eigs=np.stack([o.top_eigs for o in outcomes]),
        mfan=stack_mfan(o.mfan for o in outcomes) if mfan else None,
        seed=seed,
    )


def proposed_report(batch: TrialBatch, cfg: SystemConfig) -> SecrecyReport:
    gains = GainSamples(g=np.sqrt(cfg.P) * batch.gains.g,
                        g_eve=batch.gains.g_eve)
    sinr = estimate_sinr(gains, cfg.N0d)
    eve = estimate_eve_capacity(gains, cfg.P, cfg.N0e)
    return secrecy_report(sinr, eve, scheme="proposed")


@dataclass(frozen=True, eq=False)
class PointResult:
    cfg: SystemConfig
    seed: int
    trials: int
    asymptotic: AsymptoticReport
    proposed: SecrecyReport | None = None
    mfan: SecrecyReport | None = None
    batch: TrialBatch | None = field(default=None, repr=False)
    wall_clock: float = 0.0


def run_point(cfg: SystemConfig, trials: int = 200, seed: int = 0,
              workers: int = 1, schemes=("proposed", "asymptotic"),
              phis=DEFAULT_PHIS, batch: TrialBatch | None = None) -> PointResult:
    """Monte Carlo and closed-form results at one operating point.

    ``batch`` reuses previously simulated trials; it must come from a
    configuration with the same uplink.
    """
    cfg = validate_config(cfg)
    unknown = set(schemes) - set(SCHEMES)
    if unknown:
        raise ValueError(f"unknown schemes {sorted(unknown)}")
    t0 = time.perf_counter()
    want_mc = "proposed" in schemes or "mfan" in schemes
    if want_mc and batch is None:
        if trials < 2:
            raise ValueError("trials must be at least 2")
        batch = run_trials(cfg, trials, seed, workers, mfan="mfan" in schemes)
    proposed = proposed_report(batch, cfg) if "proposed" in schemes else None
    mf = None
    if "mfan" in schemes:
        if batch.mfan is None:
            raise ValueError("trial batch carries no MF-AN samples")
        mf = best_phi_report(batch.mfan, cfg.P, cfg.N0d, cfg.N0e, phis)
    return PointResult(cfg=cfg, seed=seed,
                       trials=batch.trials if batch is not None else 0,
                       asymptotic=asymptotic_rate(cfg), proposed=proposed,
                       mfan=mf, batch=batch,
                       wall_clock=time.perf_counter() - t0)


@dataclass(frozen=True)
class SweepSpec:
    axis: str
    grid: tuple
    trials: int = 200
    seed: int = 0
    schemes: tuple = ("proposed", "asymptotic")
    workers: int = 1
    phis: tuple = DEFAULT_PHIS

    def __post_init__(self):
        if self.axis not in AXES:
            raise ValueError(f"axis must be one of {AXES}, got {self.axis!r}")
        grid = tuple(float(v) for v in self.grid)
        if not grid:
            raise ValueError("sweep grid is empty")
        if any(b <= a for a, b in zip(grid, grid[1:])):
            raise ValueError("sweep grid must be strictly increasing")
        if self.trials < 2:
            raise ValueError("trials must be at least 2")
        unknown = set(self.schemes) - set(SCHEMES)
        if unknown:
            raise ValueError(f"unknown schemes {sorted(unknown)}")
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "schemes", tuple(self.schemes))


@dataclass(frozen=True, eq=False)
class SweepResult:
    spec: SweepSpec
    points: list
    schema_version: int = SCHEMA_VERSION

    def rows(self):
        out = []
        for v, pt in zip(self.spec.grid, self.points):
            out.extend(point_rows(pt, self.spec.axis, v, self.spec.schemes))
        return out

    def to_csv(self) -> str:
        return rows_to_csv(self.rows())


def _point_config(base: SystemConfig, axis: str, value: float) -> SystemConfig:
    if axis == "snr":
        return base.replace(P=base.N0d * float(db_to_linear(value)))
    if axis == "rho":
        # P0 held fixed, eavesdropper power scaled
        return base.replace(Pe=value * base.P0 * base.K)
    if axis == "T":
        return base.replace(T=int(round(value)))
    return base.replace(N_t=int(round(value)))


def run_sweep(spec: SweepSpec, base: SystemConfig) -> SweepResult:
    points = []
    shared = None
    for value in spec.grid:
        cfg = validate_config(_point_config(base, spec.axis, value))
        pt = run_point(cfg, spec.trials, spec.seed, spec.workers,
                       spec.schemes, spec.phis,
                       batch=shared if spec.axis == "snr" else None)
        if spec.axis == "snr":
            shared = pt.batch
        log.info("%s=%g done in %.1fs", spec.axis, value, pt.wall_clock)
        points.append(pt)
    return SweepResult(spec=spec, points=points)


def _f(x) -> str:
    return repr(float(x))


def point_rows(pt: PointResult, axis: str, value: float, schemes) -> list:
    rows = []
    common = {"axis": axis, "axis_value": _f(value), "seed": pt.seed,
              "schema_version": SCHEMA_VERSION}

    def emit(scheme, rep: SecrecyReport, phi="nan"):
        for k in range(len(rep.rate)):
            rows.append({**common, "scheme": scheme, "k": k,
                         "rate_bits": _f(rep.rate[k]),
                         "c_eve_bits": _f(rep.c_eve[k]),
                         "secrecy_bits": _f(rep.secrecy[k]),
                         "sum_secrecy_bits": _f(rep.sum_secrecy),
                         "stderr": _f(rep.rate_stderr[k]),
                         "sum_stderr": _f(rep.sum_stderr),
                         "phi": phi, "trials": rep.trials})

    for scheme in schemes:
        if scheme == "proposed":
            emit("proposed", pt.proposed)
        elif scheme == "mfan":
            emit("mfan", pt.mfan, _f(pt.mfan.params["phi"]))
        elif scheme == "asymptotic":
            a = pt.asymptotic
            for k in range(len(a.rate)):
                rows.append({**common, "scheme": "asymptotic", "k": k,
                             "rate_bits": _f(a.rate[k]), "c_eve_bits": _f(0.0),
                             "secrecy_bits": _f(a.rate[k]),
                             "sum_secrecy_bits": _f(a.sum_rate),
                             "stderr": _f(0.0), "sum_stderr": _f(0.0),
                             "phi": "nan", "trials": 0})
    return rows


def rows_to_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, lineterminator="\n")
    w.writeheader()
    w.writerows(rows)
    return buf.getvalue()


def write_csv(path, rows) -> None:
    text = rows_to_csv(rows)
    if path in (None, "-"):
        print(text, end="")
    else:
        with open(path, "w", newline="") as fh:
            fh.write(text)
