"""Data-aided eigenspace channel estimation.

The BS forms the sample Gram of its whole uplink block (pilots and data),
sorts the eigenpairs in ascending order and keeps the eigenvectors whose rank
matches the power level of its own users.  Projecting the pilot block on that
slice and despreading with each pilot gives a K-dimensional channel estimate
in which the eavesdropper's pilot attack has been projected out.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .config import OrderedPowerProfile, SystemConfig, order_powers
from .signals import PilotMatrix, UplinkObservation

__all__ = [
    "EigenBasis",
    "SubspaceEstimate",
    "EigenSolverError",
    "sample_gram",
    "eigendecompose_ascending",
    "select_desired_subspace",
    "despread_and_estimate",
    "subspace_alignment",
    "estimate_cell",
    "spectrum_rows",
    "dump_spectrum",
]


class EigenSolverError(RuntimeError):
    pass


@dataclass(frozen=True, eq=False)
class EigenBasis:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


@dataclass(frozen=True, eq=False)
class SubspaceEstimate:
    """Selected eigenvectors and the per-user equivalent channel estimates.

    ``h_hat[k]`` is the length-K estimate of user ``k``; ``Z0p`` is the
    projected pilot block ``V_eq^H Yp``.
    """

    V_eq: np.ndarray
    Z0p: np.ndarray
    h_hat: np.ndarray


def sample_gram(Y0: np.ndarray) -> np.ndarray:
    """``Y0 Y0^H / (T N_t)`` for an ``N_t x T`` block."""
    Nt, T = Y0.shape
    return (Y0 @ Y0.conj().T) / (T * Nt)


def eigendecompose_ascending(G: np.ndarray) -> EigenBasis:
    """Hermitian eigendecomposition with ascending eigenvalues.

    Each eigenvector is rotated so that its largest-magnitude entry is real
    and positive.
    """
    G = 0.5 * (G + G.conj().T)
    try:
        w, V = np.linalg.eigh(G)
    except np.linalg.LinAlgError as exc:
        finite = bool(np.all(np.isfinite(G)))
        cond = np.linalg.cond(G) if finite else float("nan")
        raise EigenSolverError(
            f"eigensolver failed on {G.shape} Gram (finite={finite}, "
            f"cond={cond:.3e}, fro={np.linalg.norm(G) if finite else 'nan'})"
        ) from exc
    # eigh is ascending already; a stable argsort guards other LAPACK drivers
    order = np.argsort(w, kind="stable")
    w, V = w[order], V[:, order]
    pivot = V[np.argmax(np.abs(V), axis=0), np.arange(V.shape[1])]
    V = V * (np.abs(pivot) / pivot)
    return EigenBasis(eigenvalues=w, eigenvectors=V)


def select_desired_subspace(eig: EigenBasis,
                            prof: OrderedPowerProfile) -> np.ndarray:
    """Columns ``N_t - M + i_k`` of the ascending eigenbasis."""
    Nt = eig.eigenvectors.shape[0]
    if Nt < prof.M:
        raise ValueError(f"N_t={Nt} < M={prof.M}")
    cols = Nt - prof.M + np.asarray(prof.desired_indices)
    return eig.eigenvectors[:, cols]


def despread_and_estimate(V_eq: np.ndarray, Yp: np.ndarray,
                          pilots: PilotMatrix, P0: float, N0: float,
                          tau: int | None = None) -> SubspaceEstimate:
    """Project the pilot block on ``V_eq``, despread and apply the MMSE gain.

    ``h_hat[k] = sqrt(P0) / (P0 tau + N0) * V_eq^H Yp conj(omega_k)``.
    """
    tau = pilots.tau if tau is None else tau
    if V_eq.shape[0] != Yp.shape[0] or Yp.shape[1] != pilots.tau:
        raise ValueError("V_eq, Yp and pilots have inconsistent shapes")
    Z0p = V_eq.conj().T @ Yp
    z = Z0p @ pilots.omega.conj()                     # column k is z_k
    h_hat = (np.sqrt(P0) / (P0 * tau + N0)) * z.T
    return SubspaceEstimate(V_eq=V_eq, Z0p=Z0p, h_hat=h_hat)


def subspace_alignment(V_eq: np.ndarray, x: np.ndarray) -> float:
    """Fraction of the energy of ``x`` that lies in ``span(V_eq)``."""
    x = np.asarray(x)
    nx = np.vdot(x, x).real
    if nx == 0:
        raise ValueError("alignment of the zero vector is undefined")
    p = V_eq.conj().T @ x
    return float(np.clip(np.vdot(p, p).real / nx, 0.0, 1.0))


def estimate_cell(cfg: SystemConfig, obs: UplinkObservation,
                  pilots: PilotMatrix, profile: OrderedPowerProfile | None = None,
                  ) -> tuple[SubspaceEstimate, EigenBasis]:
    """Full estimation pipeline at BS ``obs.bs`` for the users of that cell."""
    bs = obs.bs
    if profile is None:
        profile = order_powers(cfg, bs)
    eig = eigendecompose_ascending(sample_gram(obs.Y0))
    V_eq = select_desired_subspace(eig, profile)
    est = despread_and_estimate(V_eq, obs.Yp, pilots,
                                cfg.cell_powers[bs], cfg.N0, cfg.tau)
    return est, eig


def spectrum_rows(eig: EigenBasis, prof: OrderedPowerProfile):
    """``(index, eigenvalue, label)`` rows, ascending, 0-based index.

    The lowest ``N_t - M`` positions are labelled ``noise``; the top ``M``
    carry the class implied by the power ordering.
    """
    Nt = eig.eigenvalues.shape[0]
    offset = Nt - prof.M
    for j, lam in enumerate(eig.eigenvalues):
        label = "noise" if j < offset else prof.labels[j - offset]
        yield j, float(lam), label


def dump_spectrum(dest, eig: EigenBasis, prof: OrderedPowerProfile) -> None:
    """Write :func:`spectrum_rows` as CSV to a path or an open text stream."""
    if hasattr(dest, "write"):
        _write_spectrum(dest, eig, prof)
    else:
        with open(dest, "w", newline="") as fh:
            _write_spectrum(fh, eig, prof)


def _write_spectrum(fh, eig, prof):
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["index", "eigenvalue", "label"])
    for j, lam, label in spectrum_rows(eig, prof):
        w.writerow([j, repr(lam), label])
