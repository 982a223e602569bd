"""Matched-filter plus artificial-noise baseline (reconstructed).

Each BS estimates its users by plain pilot despreading, which under the
pilot attack steers the estimate toward the eavesdropper.  Beams are the
normalised estimates with power ``phi * P / K`` each; the remaining
``(1 - phi) * P`` is spread as artificial noise over an orthonormal basis of
the null space of the estimated channels.

Per-trial quantities are stored at unit beam and unit AN power so one set of
trials can be evaluated for every ``phi`` and ``P``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .downlink import (GainSamples, SecrecyReport, downlink_channels,
                       estimate_eve_capacity, estimate_sinr, secrecy_report)
from .signals import ChannelSet, PilotMatrix

__all__ = [
    "SCHEME_LABEL",
    "DEFAULT_PHIS",
    "MfanConfig",
    "MfanSamples",
    "conventional_estimate",
    "an_basis",
    "mfan_trial",
    "stack_mfan",
    "mfan_report",
    "mfan_precode_and_rate",
    "best_phi_report",
]

SCHEME_LABEL = "MF-AN (reconstructed)"
DEFAULT_PHIS = tuple(np.round(np.arange(1, 10) / 10, 1))


@dataclass(frozen=True)
class MfanConfig:
    phi: float

    def __post_init__(self):
        if not 0 < self.phi <= 1:
            raise ValueError(f"phi must lie in (0, 1], got {self.phi}")


def conventional_estimate(Yp: np.ndarray, pilots: PilotMatrix, P0: float,
                          tau: int | None = None) -> np.ndarray:
    """Least-squares despreading ``Yp conj(omega_k) / (sqrt(P0) tau)``.

    Returns a ``(K, N_t)`` array, row ``k`` being user ``k``'s estimate.
    """
    tau = pilots.tau if tau is None else tau
    return (Yp @ pilots.omega.conj()).T / (np.sqrt(P0) * tau)


def an_basis(h_est: np.ndarray) -> np.ndarray:
    """Orthonormal ``N_t x (N_t - K)`` basis of the null space of ``h_est^H``.

    ``h_est`` is ``(K, N_t)`` as returned by :func:`conventional_estimate`.
    """
    K, Nt = h_est.shape
    if K >= Nt:
        raise ValueError(f"no artificial-noise null space: K={K} >= N_t={Nt}")
    Q, _ = np.linalg.qr(h_est.T, mode="complete")
    return Q[:, K:]


@dataclass(frozen=True, eq=False)
class MfanSamples:
    """Unit-power MF-AN terms, one trial or stacked on axis 0.

    ``g[..., l, t, k]``: gain of BS ``l``'s unit-power beam ``t`` at user
    ``k`` of cell 0.  ``an_user[..., l, k]``: AN power from BS ``l`` at user
    ``k`` per unit total AN power.  ``eve_signal[..., k]``: eavesdropper beam
    energy ``||He^H w_k||^2``.  ``eve_an``: ``||He^H Z||_F^2 / N_e`` per unit
    AN power.
    """

    g: np.ndarray
    an_user: np.ndarray
    eve_signal: np.ndarray
    eve_an: np.ndarray


def mfan_trial(channels: ChannelSet, estimates) -> MfanSamples:
    """Unit-power terms of one trial.

    ``estimates[l]`` is BS ``l``'s ``(K, N_t)`` conventional estimate.
    """
    hd = downlink_channels(channels)                  # (L+1, K, N_t)
    Lp, K, Nt = hd.shape
    Ne = channels.He.shape[2]
    g = np.empty((Lp, K, K), complex)
    an_user = np.empty((Lp, K))
    Z0 = None
    W0 = None
    for l, h_est in enumerate(estimates):
        norms = np.linalg.norm(h_est, axis=1)
        if np.any(norms == 0):
            raise ZeroDivisionError("zero-norm channel estimate")
        W = h_est / norms[:, None]                    # (K, N_t) beams
        Z = an_basis(h_est)
        g[l] = (hd[l].conj() @ W.T).T                 # [t, k]
        an_user[l] = np.sum(np.abs(hd[l].conj() @ Z) ** 2, axis=1) / (Nt - K)
        if l == 0:
            Z0, W0 = Z, W
    He = channels.He[0]
    eve_signal = np.sum(np.abs(He.conj().T @ W0.T) ** 2, axis=0)
    eve_an = np.sum(np.abs(He.conj().T @ Z0) ** 2) / Ne / (Nt - K)
    return MfanSamples(g=g, an_user=an_user, eve_signal=eve_signal,
                       eve_an=np.float64(eve_an))


def stack_mfan(trials) -> MfanSamples:
    trials = list(trials)
    return MfanSamples(*(np.stack([getattr(t, f) for t in trials])
                         for f in ("g", "an_user", "eve_signal", "eve_an")))


def mfan_report(samples: MfanSamples, phi: float, P: float, N0d: float,
                N0e: float) -> SecrecyReport:
    MfanConfig(phi)
    s = samples if samples.g.ndim == 4 else stack_mfan([samples])
    K = s.g.shape[-1]
    beam = phi * P / K
    an = (1.0 - phi) * P
    gains = GainSamples(g=np.sqrt(beam) * s.g, g_eve=beam * s.eve_signal)
    sinr = estimate_sinr(gains, N0d,
                         extra_interference=an * s.an_user.sum(axis=1))
    eve_sinr = beam * s.eve_signal / (an * s.eve_an[:, None] + N0e)
    eve = estimate_eve_capacity(None, P, N0e, sinr=eve_sinr)
    return secrecy_report(sinr, eve, scheme="mfan", phi=float(phi))


def mfan_precode_and_rate(channels, estimates, phi: float, P: float,
                          N0d: float, N0e: float) -> SecrecyReport:
    """Secrecy report over trials.

    ``channels`` is a sequence of :class:`ChannelSet` and ``estimates`` the
    matching sequence of per-BS conventional estimates.
    """
    MfanConfig(phi)
    samples = stack_mfan(mfan_trial(c, e) for c, e in zip(channels, estimates))
    return mfan_report(samples, phi, P, N0d, N0e)


def best_phi_report(samples: MfanSamples, P: float, N0d: float, N0e: float,
                    phis=DEFAULT_PHIS) -> SecrecyReport:
    """Report at the power split giving the largest secrecy sum-rate."""
    reports = [mfan_report(samples, phi, P, N0d, N0e) for phi in phis]
    return max(reports, key=lambda r: r.sum_secrecy)
