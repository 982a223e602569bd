"""Downlink precoding, effective gains and Monte Carlo secrecy rates.

User rates use the use-and-forget bound: the mean desired gain is treated as
known to the user and everything else (gain fluctuation, intra- and
inter-cell leakage, extra interference such as artificial noise) as Gaussian
noise.  The eavesdropper bound assumes it removes all user interference.

Moments are plain sample moments over trials.  Standard errors of the rates
and of the secrecy sum come from the leave-one-out jackknife, which handles
the ratio of moments in the SINR without a linearisation by hand.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from .signals import ChannelSet

__all__ = [
    "PrecoderSet",
    "GainSamples",
    "SinrEstimate",
    "EveCapacity",
    "SecrecyReport",
    "build_precoders",
    "compute_gains",
    "stack_gains",
    "estimate_sinr",
    "estimate_eve_capacity",
    "secrecy_sum_rate",
    "secrecy_report",
    "dump_gains",
]


@dataclass(frozen=True, eq=False)
class PrecoderSet:
    """``t[l, k]`` is the unit-norm beam of user ``k`` at BS ``l``."""

    t: np.ndarray


def build_precoders(estimates) -> PrecoderSet:
    """``t[l, k] = V_eq^l h_hat[l, k] / ||h_hat[l, k]||`` for every cell."""
    beams = []
    for est in estimates:
        norms = np.linalg.norm(est.h_hat, axis=1)
        if np.any(norms == 0):
            raise ZeroDivisionError("zero-norm channel estimate")
        beams.append((est.V_eq @ (est.h_hat / norms[:, None]).T).T)
    return PrecoderSet(np.stack(beams))


@dataclass(frozen=True, eq=False)
class GainSamples:
    """Effective gains of one trial, or of many trials stacked on axis 0.

    ``g[..., l, t, k]`` is the gain of stream ``t`` of BS ``l`` at user ``k``
    of cell 0; ``g_eve[..., k]`` is the eavesdropper's beam energy for user
    ``k``.
    """

    g: np.ndarray
    g_eve: np.ndarray


def downlink_channels(channels: ChannelSet) -> np.ndarray:
    """``out[l, k]``: channel through which BS ``l``'s beams reach user k of cell 0.

    The gain definition pairs BS ``l``'s precoder with ``h[l, k, 0]``, a
    channel that BS ``l`` never observes, so inter-cell leakage is
    independent of BS ``l``'s estimate.
    """
    return channels.h[:, :, 0, :]


def compute_gains(channels: ChannelSet, precoders: PrecoderSet,
                  P: float) -> GainSamples:
    hd = downlink_channels(channels)
    g = np.sqrt(P) * np.einsum("lkn,ltn->ltk", hd.conj(), precoders.t)
    leak = channels.He[0].conj().T @ precoders.t[0].T   # (N_e, K)
    g_eve = np.sum(np.abs(leak) ** 2, axis=0)
    return GainSamples(g=g, g_eve=g_eve)


def stack_gains(trials) -> GainSamples:
    trials = list(trials)
    return GainSamples(g=np.stack([t.g for t in trials]),
                       g_eve=np.stack([t.g_eve for t in trials]))


def _loo_mean(x):
    n = x.shape[0]
    return (x.sum(axis=0) - x) / (n - 1)


def _jackknife_se(loo):
    n = loo.shape[0]
    if n < 3:
        return np.full(loo.shape[1:], np.nan)
    return np.sqrt((n - 1) / n * np.sum((loo - loo.mean(axis=0)) ** 2, axis=0))


@dataclass(frozen=True, eq=False)
class SinrEstimate:
    gamma: np.ndarray
    rate: np.ndarray
    gamma_stderr: np.ndarray
    rate_stderr: np.ndarray
    mean_gain: np.ndarray
    gain_var: np.ndarray
    intra_power: np.ndarray
    inter_power: np.ndarray
    extra_power: np.ndarray
    moment_stderr: dict
    rate_loo: np.ndarray = field(repr=False)


def estimate_sinr(trials, N0d: float, extra_interference=None) -> SinrEstimate:
    """Use-and-forget SINR and rate per user of cell 0.

    ``trials`` is a sequence of :class:`GainSamples` or an already stacked
    one.  ``extra_interference`` is an optional ``(n, K)`` array of per-trial
    interference powers (artificial noise leakage) whose mean joins the
    denominator.
    """
    gs = trials if isinstance(trials, GainSamples) else stack_gains(trials)
    g = gs.g
    if g.ndim != 4 or g.shape[0] < 2:
        raise ValueError("need at least 2 trials to estimate the SINR")
    n, Lp, K, _ = g.shape
    idx = np.arange(K)
    D = g[:, 0, idx, idx]                             # (n, K)
    power = np.abs(g) ** 2
    intra = power[:, 0].sum(axis=1) - np.abs(D) ** 2  # sum over t != k
    inter = power[:, 1:].sum(axis=(1, 2))
    extra = np.zeros((n, K)) if extra_interference is None else np.asarray(
        extra_interference, dtype=float)

    mD = D.mean(axis=0)
    vD = D.var(axis=0, ddof=1)
    mI = intra.mean(axis=0) + inter.mean(axis=0) + extra.mean(axis=0)
    gamma = np.abs(mD) ** 2 / (N0d + vD + mI)

    # leave-one-out replicates
    mD_loo = _loo_mean(D)
    if n >= 3:
        q = np.sum(np.abs(D) ** 2, axis=0) - np.abs(D) ** 2
        vD_loo = (q - (n - 1) * np.abs(mD_loo) ** 2) / (n - 2)
    else:
        vD_loo = np.broadcast_to(vD, D.shape)
    mI_loo = _loo_mean(intra + inter + extra)
    gamma_loo = np.abs(mD_loo) ** 2 / (N0d + vD_loo + mI_loo)
    rate_loo = np.log2(1.0 + gamma_loo)

    sq = lambda x: x.std(axis=0, ddof=1) / np.sqrt(n)  # noqa: E731
    moment_stderr = {
        "mean_gain_sq": _jackknife_se(np.abs(mD_loo) ** 2),
        "gain_var": _jackknife_se(vD_loo) if n >= 3 else np.full(K, np.nan),
        "intra_power": sq(intra),
        "inter_power": sq(inter),
    }
    return SinrEstimate(
        gamma=gamma, rate=np.log2(1.0 + gamma),
        gamma_stderr=_jackknife_se(gamma_loo),
        rate_stderr=_jackknife_se(rate_loo),
        mean_gain=mD, gain_var=vD,
        intra_power=intra.mean(axis=0), inter_power=inter.mean(axis=0),
        extra_power=extra.mean(axis=0),
        moment_stderr=moment_stderr, rate_loo=rate_loo)


@dataclass(frozen=True, eq=False)
class EveCapacity:
    capacity: np.ndarray
    stderr: np.ndarray
    per_trial: np.ndarray = field(repr=False)


def estimate_eve_capacity(trials, P: float, N0e: float, sinr=None) -> EveCapacity:
    """Mean of ``log2(1 + P/N0e * g_eve)`` over trials.

    ``sinr`` optionally overrides the per-trial eavesdropper SINR (shape
    ``(n, K)``), for schemes whose eavesdropper also sees artificial noise.
    """
    if sinr is None:
        gs = trials if isinstance(trials, GainSamples) else stack_gains(trials)
        g_eve = np.atleast_2d(gs.g_eve)
        sinr = (P / N0e) * g_eve
    c = np.log2(1.0 + np.atleast_2d(sinr))
    n = c.shape[0]
    se = c.std(axis=0, ddof=1) / np.sqrt(n) if n > 1 else np.full(c.shape[1], np.nan)
    return EveCapacity(capacity=c.mean(axis=0), stderr=se, per_trial=c)


@dataclass(frozen=True, eq=False)
class SecrecyReport:
    rate: np.ndarray
    c_eve: np.ndarray
    secrecy: np.ndarray
    sum_secrecy: float
    trials: int = 0
    rate_stderr: np.ndarray | None = None
    c_eve_stderr: np.ndarray | None = None
    sum_stderr: float = float("nan")
    scheme: str = "proposed"
    sinr: SinrEstimate | None = field(default=None, repr=False)
    params: dict = field(default_factory=dict)


def secrecy_sum_rate(R, C) -> SecrecyReport:
    """Sum over users of ``max(0, R_k - C_k)``."""
    R = np.asarray(R, dtype=float)
    C = np.asarray(C, dtype=float)
    if R.shape != C.shape:
        raise ValueError("rate and capacity vectors differ in length")
    sec = np.maximum(0.0, R - C)
    return SecrecyReport(rate=R, c_eve=C, secrecy=sec, sum_secrecy=float(sec.sum()))


def secrecy_report(sinr: SinrEstimate, eve: EveCapacity,
                   scheme: str = "proposed", **params) -> SecrecyReport:
    base = secrecy_sum_rate(sinr.rate, eve.capacity)
    n = eve.per_trial.shape[0]
    if sinr.rate_loo.shape[0] == n and n >= 3:
        sum_loo = np.maximum(0.0, sinr.rate_loo - _loo_mean(eve.per_trial)).sum(axis=1)
        sum_se = float(_jackknife_se(sum_loo[:, None])[0])
    else:
        sum_se = float("nan")
    return SecrecyReport(
        rate=base.rate, c_eve=base.c_eve, secrecy=base.secrecy,
        sum_secrecy=base.sum_secrecy, trials=n,
        rate_stderr=sinr.rate_stderr, c_eve_stderr=eve.stderr,
        sum_stderr=sum_se, scheme=scheme, sinr=sinr, params=dict(params))


def dump_gains(path, trials) -> None:
    """Per-trial gain table: ``trial, l, t, k, re, im, g_eve``.

    ``g_eve`` is repeated on every row of user ``k`` of the trial.
    """
    gs = trials if isinstance(trials, GainSamples) else stack_gains(trials)
    g = gs.g if gs.g.ndim == 4 else gs.g[None]
    ge = np.atleast_2d(gs.g_eve)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["trial", "l", "t", "k", "re", "im", "g_eve"])
        for i, l, t, k in np.ndindex(*g.shape):
            v = g[i, l, t, k]
            w.writerow([i, l, t, k, repr(float(v.real)), repr(float(v.imag)),
                        repr(float(ge[i, k]))])
