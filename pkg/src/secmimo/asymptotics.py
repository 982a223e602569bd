"""Large-array closed forms for the proposed scheme.

``a1`` is the limit of the squared norm of the equivalent channel estimate,
``a2 - a1`` the limit of the variance of the desired effective gain.  The
eavesdropper capacity vanishes in the same limit, so the asymptotic secrecy
sum-rate is the sum of the users' rates.

The numerator of the SINR carries the downlink power ``P``: the mean
desired gain is ``sqrt(P)`` times the mean estimate norm.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .config import SystemConfig

__all__ = ["AsymptoticReport", "a1", "a2", "gamma_bar", "asymptotic_rate"]


def a1(P0, tau, N0, beta, N_t, K):
    P0, tau, N0, beta = (np.asarray(x, dtype=float) for x in (P0, tau, N0, beta))
    s = P0 * tau
    # grouped so that N0 = 0 gives beta (N_t + K - 1) exactly
    return (s / (s + N0)) ** 2 * (beta * (N_t + K - 1)) + s * K * N0 / (s + N0) ** 2


def a2(P0, tau, N0, beta, N_t, K):
    P0, tau, N0, beta = (np.asarray(x, dtype=float) for x in (P0, tau, N0, beta))
    s = P0 * tau
    bn = beta * (N_t + K - 1)
    den = s * bn + N0
    return bn * (s * bn / den) + N0 * (N_t * beta + 3 * (K - 1) * beta) / den


@dataclass(frozen=True, eq=False)
class AsymptoticReport:
    a1: np.ndarray
    a2: np.ndarray
    gamma_bar: np.ndarray
    rate: np.ndarray

    @property
    def sum_rate(self) -> float:
        return float(self.rate.sum())


def _terms(cfg: SystemConfig):
    beta0 = cfg.beta[0, :, 0]
    A1 = a1(cfg.P0, cfg.tau, cfg.N0, beta0, cfg.N_t, cfg.K)
    A2 = a2(cfg.P0, cfg.tau, cfg.N0, beta0, cfg.N_t, cfg.K)
    cross = cfg.beta[1:, :, 0].sum(axis=0)            # sum over l >= 1
    P, K = cfg.P, cfg.K
    den = cfg.N0d + P * (A2 - A1) + P * (K - 1) * beta0 + P * K * cross
    return A1, A2, P * A1 / den


def gamma_bar(cfg: SystemConfig, k: int) -> float:
    return float(_terms(cfg)[2][k])


def asymptotic_rate(cfg: SystemConfig) -> AsymptoticReport:
    A1, A2, g = _terms(cfg)
    if np.any(A2 < A1):
        # reported, not clamped: the variance term then lowers the denominator
        bad = np.flatnonzero(A2 < A1).tolist()
        warnings.warn(f"a2 < a1 for users {bad}; closed-form variance term is "
                      "negative", RuntimeWarning, stacklevel=2)
    return AsymptoticReport(a1=A1, a2=A2, gamma_bar=g, rate=np.log2(1.0 + g))
