"""Channel, pilot, attack and uplink observation synthesis.

Randomness comes from one root seed.  Every trial and every entity inside a
trial (channels, data symbols, eavesdropper noise, receiver noise at each BS)
owns a child stream keyed by a fixed counter tuple, so any single term can be
regenerated on its own.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import SystemConfig

__all__ = [
    "CHANNELS", "DATA", "ATTACK", "NOISE",
    "UPLINK_TERMS",
    "PilotMatrix",
    "ChannelSet",
    "AttackSignals",
    "UplinkObservation",
    "trial_seed",
    "entity_rng",
    "complex_normal",
    "build_pilots",
    "sample_channels",
    "build_attack",
    "assemble_uplink",
    "dump_matrices",
    "load_matrices",
]

# entity codes of the counter scheme
CHANNELS, DATA, ATTACK, NOISE = 0, 1, 2, 3

UPLINK_TERMS = ("desired", "interference", "attack", "noise")


def trial_seed(root: int, trial: int) -> np.random.SeedSequence:
    return np.random.SeedSequence(int(root), spawn_key=(int(trial),))


def _as_seed_sequence(seed) -> np.random.SeedSequence:
    if isinstance(seed, np.random.SeedSequence):
        return seed
    return np.random.SeedSequence(int(seed))


def entity_rng(seed, entity: int, index: int = 0) -> np.random.Generator:
    """Generator for one entity of one trial.

    ``seed`` is an int or the trial's :class:`~numpy.random.SeedSequence`.
    """
    ss = _as_seed_sequence(seed)
    child = np.random.SeedSequence(
        ss.entropy, spawn_key=tuple(ss.spawn_key) + (int(entity), int(index)))
    return np.random.Generator(np.random.PCG64(child))


def complex_normal(rng: np.random.Generator, shape, var=1.0) -> np.ndarray:
    """Circularly symmetric complex Gaussian samples with variance ``var``."""
    z = rng.standard_normal(tuple(shape) + (2,))
    return np.sqrt(np.asarray(var) / 2.0) * (z[..., 0] + 1j * z[..., 1])


@dataclass(frozen=True, eq=False)
class PilotMatrix:
    """``omega[:, k]`` is the length-``tau`` pilot of user ``k``."""

    omega: np.ndarray

    @property
    def tau(self) -> int:
        return self.omega.shape[0]

    @property
    def K(self) -> int:
        return self.omega.shape[1]


def build_pilots(K: int, tau: int) -> PilotMatrix:
    """First ``K`` columns of the ``tau``-point DFT basis, scaled to energy ``tau``."""
    if K > tau:
        raise ValueError(f"cannot build {K} orthogonal pilots of length {tau}")
    n = np.arange(tau)
    omega = np.exp(-2j * np.pi * np.outer(n, np.arange(K)) / tau)
    return PilotMatrix(omega)


@dataclass(frozen=True, eq=False)
class ChannelSet:
    """One fading realization.

    ``h[l, k, p]`` is the length-``N_t`` channel of user ``(l, k)`` at BS
    ``p``; ``He[p]`` is the ``N_t x N_e`` eavesdropper channel at BS ``p``.
    """

    h: np.ndarray
    He: np.ndarray


def sample_channels(cfg: SystemConfig, seed) -> ChannelSet:
    rng = entity_rng(seed, CHANNELS)
    Lp = cfg.L + 1
    h = complex_normal(rng, (Lp, cfg.K, Lp, cfg.N_t), cfg.beta[..., None])
    He = complex_normal(rng, (Lp, cfg.N_t, cfg.N_e), cfg.beta_e[:, None, None])
    return ChannelSet(h=h, He=He)


@dataclass(frozen=True, eq=False)
class AttackSignals:
    """Eavesdropper pilot attack ``W_sum`` (``N_e x tau``) and data-phase
    artificial noise ``A`` (``N_e x (T - tau)``), both before power scaling."""

    W_sum: np.ndarray
    A: np.ndarray


def build_attack(cfg: SystemConfig, pilots: PilotMatrix, seed) -> AttackSignals:
    # every eavesdropper antenna sends the sum of all cell pilots
    row = pilots.omega.sum(axis=1)
    W_sum = np.tile(row, (cfg.N_e, 1))
    A = complex_normal(entity_rng(seed, ATTACK), (cfg.N_e, cfg.data_length))
    return AttackSignals(W_sum=W_sum, A=A)


@dataclass(frozen=True, eq=False)
class UplinkObservation:
    """Received pilot block, data block and their concatenation at one BS.

    ``data[l, k]`` holds the unit-power data symbols of user ``(l, k)``.
    """

    Yp: np.ndarray
    Yd: np.ndarray
    data: np.ndarray
    bs: int = 0

    @property
    def Y0(self) -> np.ndarray:
        return np.hstack([self.Yp, self.Yd])


def assemble_uplink(cfg: SystemConfig, channels: ChannelSet,
                    pilots: PilotMatrix, attack: AttackSignals, seed,
                    bs: int = 0, terms=UPLINK_TERMS) -> UplinkObservation:
    """Uplink pilot and data blocks received at BS ``bs``.

    Users of cell ``bs`` form the ``desired`` term, all other cells the
    ``interference`` term.  Data symbols are common to every BS of a trial
    (they come from the trial's data stream); receiver noise is drawn per BS.
    Restricting ``terms`` leaves the random draws untouched, so the partial
    observations add up exactly to the full one.
    """
    terms = set(terms)
    unknown = terms - set(UPLINK_TERMS)
    if unknown:
        raise ValueError(f"unknown uplink terms {sorted(unknown)}")
    Lp, K, Nt, Ne = cfg.L + 1, cfg.K, cfg.N_t, cfg.N_e
    tau, Td = cfg.tau, cfg.data_length
    if pilots.omega.shape != (tau, K):
        raise ValueError(f"pilot matrix shape {pilots.omega.shape} != {(tau, K)}")
    if channels.h.shape != (Lp, K, Lp, Nt) or channels.He.shape != (Lp, Nt, Ne):
        raise ValueError("channel set does not match the configuration")
    if attack.W_sum.shape != (Ne, tau) or attack.A.shape != (Ne, Td):
        raise ValueError("attack signals do not match the configuration")

    data = complex_normal(entity_rng(seed, DATA), (Lp, K, Td))
    amp = np.sqrt(cfg.cell_powers)
    H = channels.h[:, :, bs, :]                       # (L+1, K, N_t)

    def users(cells):
        Yp = np.zeros((Nt, tau), complex)
        Yd = np.zeros((Nt, Td), complex)
        for l in cells:
            Yp += (amp[l] * H[l].T) @ pilots.omega.T
            Yd += (amp[l] * H[l].T) @ data[l]
        return Yp, Yd

    Yp = np.zeros((Nt, tau), complex)
    Yd = np.zeros((Nt, Td), complex)
    if "desired" in terms:
        p, d = users([bs])
        Yp, Yd = Yp + p, Yd + d
    if "interference" in terms:
        p, d = users([l for l in range(Lp) if l != bs])
        Yp, Yd = Yp + p, Yd + d
    if "attack" in terms:
        He = channels.He[bs]
        Yp = Yp + np.sqrt(cfg.Pe / (K * Ne)) * (He @ attack.W_sum)
        Yd = Yd + np.sqrt(cfg.Pe / Ne) * (He @ attack.A)
    if "noise" in terms:
        noise = complex_normal(entity_rng(seed, NOISE, bs), (Nt, cfg.T), cfg.N0)
        Yp = Yp + noise[:, :tau]
        Yd = Yd + noise[:, tau:]
    return UplinkObservation(Yp=Yp, Yd=Yd, data=data, bs=bs)


def dump_matrices(path, matrices: dict) -> None:
    """Write complex matrices as text.

    Each block starts with ``# name rows cols`` followed by one line per row
    holding ``re,im`` pairs in row-major order.  Vectors are written as a
    single column; higher-rank arrays are flattened to ``(prod(shape[:-1]),
    shape[-1])``.
    """
    with open(path, "w") as fh:
        for name, arr in matrices.items():
            a = np.asarray(arr, dtype=complex)
            if a.ndim == 1:
                a = a[:, None]
            elif a.ndim > 2:
                a = a.reshape(-1, a.shape[-1])
            fh.write(f"# {name} {a.shape[0]} {a.shape[1]}\n")
            for row in a:
                pairs = np.column_stack([row.real, row.imag]).ravel()
                fh.write(",".join(repr(float(x)) for x in pairs) + "\n")


def load_matrices(path) -> dict:
    out = {}
    with open(path) as fh:
        lines = fh.read().splitlines()
    i = 0
    while i < len(lines):
        _, name, rows, cols = lines[i].split()
        rows, cols = int(rows), int(cols)
        vals = np.array([[float(x) for x in ln.split(",")]
                         for ln in lines[i + 1:i + 1 + rows]])
        out[name] = (vals[:, 0::2] + 1j * vals[:, 1::2]).reshape(rows, cols)
        i += rows + 1
    return out
