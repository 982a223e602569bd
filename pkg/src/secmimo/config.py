"""Scenario parameters and the power-ordering construction.

All powers and gains are linear.  dB values are only accepted by
:func:`load_config` through keys carrying a ``_db`` suffix.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field, fields
from pathlib import Path

import numpy as np

__all__ = [
    "ConfigError",
    "SystemConfig",
    "ValidatedConfig",
    "OrderedPowerProfile",
    "validate_config",
    "order_powers",
    "default_config",
    "load_config",
    "config_to_dict",
    "db_to_linear",
]

INTERFERER = "interferer"
DESIRED = "desired"
EAVESDROPPER = "eavesdropper"

# tie-break priority at equal power level
_CLASS_RANK = {INTERFERER: 0, DESIRED: 1, EAVESDROPPER: 2}


class ConfigError(ValueError):
    """Raised for scenario parameters that cannot describe a valid system."""


def db_to_linear(x):
    return 10.0 ** (np.asarray(x, dtype=float) / 10.0)


@dataclass(frozen=True, eq=False)
class SystemConfig:
    """Parameters of one multi-cell scenario.

    Cells are indexed ``0..L``; cell 0 hosts the eavesdropper and is the
    cell whose secrecy rate is evaluated.

    Parameters
    ----------
    L, K, N_t, N_e : int
        Interfering cells, users per cell, BS antennas, eavesdropper antennas.
    T, tau : int
        Coherence interval and pilot length, in symbols.
    P0 : float
        Uplink power of the users in cell 0.
    P_l : sequence of float
        Uplink powers of cells ``1..L`` (length ``L``).
    Pe : float
        Total eavesdropper transmit power.
    P : float
        Downlink power per user stream.
    N0, N0d : float
        Uplink noise power at the BS and downlink noise power at the users.
    N0e : float or None
        Noise power at the eavesdropper receiver; ``None`` means ``N0``.
    beta : array_like, shape (L+1, K, L+1)
        ``beta[l, k, p]`` is the large-scale gain of user ``(l, k)`` at BS ``p``.
    beta_e : array_like, shape (L+1,)
        Large-scale gain of the eavesdropper at BS ``p``.
    """

    L: int
    K: int
    N_t: int
    N_e: int
    T: int
    tau: int
    P0: float
    P_l: tuple
    Pe: float
    P: float
    N0: float
    N0d: float
    beta: np.ndarray
    beta_e: np.ndarray
    N0e: float | None = None

    def __post_init__(self):
        beta = np.array(self.beta, dtype=float)
        beta_e = np.array(self.beta_e, dtype=float).reshape(-1)
        beta.setflags(write=False)
        beta_e.setflags(write=False)
        object.__setattr__(self, "beta", beta)
        object.__setattr__(self, "beta_e", beta_e)
        object.__setattr__(self, "P_l", tuple(float(p) for p in np.ravel(self.P_l)))
        if self.N0e is None:
            object.__setattr__(self, "N0e", float(self.N0))

    @property
    def M(self) -> int:
        return (self.L + 1) * self.K + self.N_e

    @property
    def data_length(self) -> int:
        return self.T - self.tau

    @property
    def snr(self) -> float:
        return self.P / self.N0d

    @property
    def rho(self) -> float:
        return self.Pe / (self.P0 * self.K)

    @property
    def cell_powers(self) -> np.ndarray:
        """Uplink power of every cell, index 0 included."""
        return np.array((self.P0,) + self.P_l, dtype=float)

    def replace(self, **changes) -> "SystemConfig":
        """Copy with some fields changed; the result is not validated."""
        kw = {f.name: getattr(self, f.name) for f in fields(SystemConfig)}
        if "N0" in changes and "N0e" not in changes and self.N0e == self.N0:
            changes["N0e"] = None
        kw.update(changes)
        return SystemConfig(**kw)


@dataclass(frozen=True, eq=False)
class ValidatedConfig(SystemConfig):
    """A :class:`SystemConfig` that passed :func:`validate_config`.

    ``power_separated`` records whether the strict ordering
    eavesdropper > desired > interferer holds at BS 0.  It is a
    diagnostic only; the estimator still runs when it is False.
    """

    power_separated: bool = field(default=False)


def validate_config(cfg: SystemConfig) -> ValidatedConfig:
    if cfg.L < 0 or cfg.K < 1 or cfg.N_e < 1 or cfg.N_t < 1:
        raise ConfigError("L must be >= 0 and K, N_e, N_t >= 1")
    if cfg.tau < cfg.K:
        raise ConfigError(
            f"pilots cannot be orthogonal: tau={cfg.tau} < K={cfg.K}")
    if cfg.T <= cfg.tau:
        raise ConfigError(f"empty data phase: T={cfg.T} <= tau={cfg.tau}")
    if cfg.N_t < cfg.M:
        raise ConfigError(f"N_t={cfg.N_t} is smaller than M={cfg.M}")
    if len(cfg.P_l) != cfg.L:
        raise ConfigError(f"P_l must have L={cfg.L} entries, got {len(cfg.P_l)}")
    if cfg.beta.shape != (cfg.L + 1, cfg.K, cfg.L + 1):
        raise ConfigError(
            f"beta must have shape {(cfg.L + 1, cfg.K, cfg.L + 1)}, "
            f"got {cfg.beta.shape}")
    if cfg.beta_e.shape != (cfg.L + 1,):
        raise ConfigError(f"beta_e must have L+1={cfg.L + 1} entries")
    scalars = {"P0": cfg.P0, "Pe": cfg.Pe, "P": cfg.P, "N0": cfg.N0,
               "N0d": cfg.N0d, "N0e": cfg.N0e}
    for name, value in scalars.items():
        if not value > 0:
            raise ConfigError(f"{name} must be positive, got {value}")
    if not all(p > 0 for p in cfg.P_l):
        raise ConfigError("all P_l must be positive")
    if not (np.all(cfg.beta > 0) and np.all(cfg.beta_e > 0)):
        raise ConfigError("all large-scale gains must be positive")

    desired = cfg.P0 * cfg.beta[0, :, 0]
    interf = cfg.cell_powers[1:, None] * cfg.beta[1:, :, 0]
    separated = bool(
        np.all(cfg.Pe * cfg.beta_e[0] > desired)
        and (interf.size == 0 or desired.min() > interf.max()))

    kw = {f.name: getattr(cfg, f.name) for f in fields(SystemConfig)}
    return ValidatedConfig(**kw, power_separated=separated)


@dataclass(frozen=True, eq=False)
class OrderedPowerProfile:
    """Ascending power levels seen by one BS and where its own users sit.

    ``desired_indices`` are 0-based positions into ``theta``.
    """

    M: int
    theta: np.ndarray
    desired_indices: np.ndarray
    labels: tuple
    bs: int = 0


def order_powers(cfg: SystemConfig, bs: int = 0) -> OrderedPowerProfile:
    """Sort the received power levels at BS ``bs`` in ascending order.

    Users of cell ``bs`` are the desired class, users of every other cell are
    interferers.  Equal levels are ordered interferer < desired <
    eavesdropper, so the desired block stays contiguous.
    """
    powers = cfg.cell_powers
    levels, labels = [], []
    for l in range(cfg.L + 1):
        if l == bs:
            continue
        for k in range(cfg.K):
            levels.append(powers[l] * cfg.beta[l, k, bs])
            labels.append(INTERFERER)
    for k in range(cfg.K):
        levels.append(powers[bs] * cfg.beta[bs, k, bs])
        labels.append(DESIRED)
    for _ in range(cfg.N_e):
        levels.append(cfg.Pe * cfg.beta_e[bs])
        labels.append(EAVESDROPPER)

    levels = np.asarray(levels, dtype=float)
    ranks = np.array([_CLASS_RANK[c] for c in labels])
    # lexsort: last key is primary; original position keeps it stable
    order = np.lexsort((np.arange(len(levels)), ranks, levels))
    theta = levels[order]
    sorted_labels = tuple(labels[i] for i in order)

    desired_indices = np.flatnonzero(np.array(sorted_labels) == DESIRED)

    ambiguous = [
        i for i in desired_indices
        if any(sorted_labels[j] != DESIRED and theta[j] == theta[i]
               for j in range(len(theta)))
    ]
    if ambiguous:
        warnings.warn(
            f"BS {bs}: desired power level coincides with an interferer or "
            "eavesdropper level; subspace separation is ambiguous",
            RuntimeWarning, stacklevel=2)

    theta.setflags(write=False)
    desired_indices.setflags(write=False)
    return OrderedPowerProfile(M=cfg.M, theta=theta,
                               desired_indices=desired_indices,
                               labels=sorted_labels, bs=bs)


def default_config(
    K: int = 5,
    N_t: int = 128,
    T: int = 1024,
    tau: int | None = None,
    L: int = 3,
    N_e: int = 4,
    p0_over_n0_db: float = 5.0,
    rho: float = 30.0,
    snr_db: float = 5.0,
    beta_own: float = 1.0,
    beta_cross: float = 0.2,
    beta_e: float = 1.0,
    N0: float = 1.0,
    N0d: float = 1.0,
) -> ValidatedConfig:
    """Reference scenario: equal cell powers, ``N0 = N0d = 1``.

    ``rho`` sets ``Pe = rho * P0 * K`` and ``snr_db`` sets ``P = N0d * SNR``.
    Every BS sees the eavesdropper with gain ``beta_e``.
    """
    tau = K if tau is None else tau
    P0 = N0 * float(db_to_linear(p0_over_n0_db))
    beta = np.full((L + 1, K, L + 1), beta_cross)
    for l in range(L + 1):
        beta[l, :, l] = beta_own
    cfg = SystemConfig(
        L=L, K=K, N_t=N_t, N_e=N_e, T=T, tau=tau,
        P0=P0, P_l=(P0,) * L, Pe=rho * P0 * K,
        P=N0d * float(db_to_linear(snr_db)), N0=N0, N0d=N0d,
        beta=beta, beta_e=np.full(L + 1, beta_e),
    )
    return validate_config(cfg)


_SCALAR_POWERS = ("P0", "Pe", "P", "N0", "N0d", "N0e")


def load_config(path_or_dict) -> ValidatedConfig:
    """Read a JSON scenario.

    Keys mirror :class:`SystemConfig`.  Power fields may instead be given in
    dB with a ``_db`` suffix (``P0_db``, ``P_l_db``, ...).  ``beta`` may be a
    full nested list or replaced by the scalars ``beta_own``/``beta_cross``;
    ``beta_e`` may be a scalar.  ``rho`` and ``snr_db`` are accepted as
    shortcuts for ``Pe`` and ``P``.
    """
    if isinstance(path_or_dict, dict):
        raw = dict(path_or_dict)
    else:
        raw = json.loads(Path(path_or_dict).read_text())

    for name in _SCALAR_POWERS + ("P_l",):
        key = name + "_db"
        if key in raw:
            if name in raw:
                raise ConfigError(f"both {name} and {key} given")
            val = db_to_linear(raw.pop(key))
            raw[name] = val.tolist() if val.ndim else float(val)

    try:
        L, K = int(raw["L"]), int(raw["K"])
    except KeyError as exc:
        raise ConfigError(f"missing key {exc}") from None

    if "beta" not in raw:
        own, cross = raw.pop("beta_own", 1.0), raw.pop("beta_cross", 0.2)
        beta = np.full((L + 1, K, L + 1), float(cross))
        for l in range(L + 1):
            beta[l, :, l] = float(own)
        raw["beta"] = beta
    if np.ndim(raw.get("beta_e", 1.0)) == 0:
        raw["beta_e"] = np.full(L + 1, float(raw.get("beta_e", 1.0)))
    if "P_l" not in raw:
        raw["P_l"] = (raw["P0"],) * L
    elif np.ndim(raw["P_l"]) == 0:
        raw["P_l"] = (float(raw["P_l"]),) * L
    if "snr_db" in raw:
        raw["P"] = raw.get("N0d", 1.0) * float(db_to_linear(raw.pop("snr_db")))
    if "rho" in raw:
        raw["Pe"] = float(raw.pop("rho")) * raw["P0"] * K
    raw.setdefault("N0d", 1.0)
    raw.setdefault("tau", K)

    known = {f.name for f in fields(SystemConfig)}
    unknown = set(raw) - known
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    missing = known - set(raw) - {"N0e"}
    if missing:
        raise ConfigError(f"missing config keys: {sorted(missing)}")
    for name in ("L", "K", "N_t", "N_e", "T", "tau"):
        raw[name] = int(raw[name])
    return validate_config(SystemConfig(**raw))


def config_to_dict(cfg: SystemConfig) -> dict:
    """JSON-ready dict that :func:`load_config` reads back unchanged."""
    out = {}
    for f in fields(SystemConfig):
        v = getattr(cfg, f.name)
        out[f.name] = v.tolist() if isinstance(v, np.ndarray) else (
            list(v) if isinstance(v, tuple) else v)
    return out
