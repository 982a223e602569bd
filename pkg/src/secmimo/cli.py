"""Command line entry point: ``secmimo <subcommand>``."""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys

import numpy as np

from .asymptotics import asymptotic_rate
from .config import (config_to_dict, db_to_linear, load_config, order_powers,
                     default_config, validate_config)
from .downlink import GainSamples, dump_gains
from .estimator import dump_spectrum, estimate_cell
from .harness import (AXES, SweepSpec, point_rows, run_point, run_sweep,
                      write_csv)
from .mfan import DEFAULT_PHIS
from .signals import (assemble_uplink, build_attack, build_pilots,
                      dump_matrices, sample_channels, trial_seed)


def _base_config(args):
    cfg = load_config(args.config) if args.config else default_config()
    changes = {}
    if args.snr_db is not None:
        changes["P"] = cfg.N0d * float(db_to_linear(args.snr_db))
    if args.rho is not None:
        changes["Pe"] = args.rho * cfg.P0 * cfg.K
    if args.T is not None:
        changes["T"] = args.T
    if args.Nt is not None:
        changes["N_t"] = args.Nt
    return validate_config(cfg.replace(**changes)) if changes else cfg


def _common(p, mc=True):
    p.add_argument("--config", help="JSON scenario file (default: built-in operating point)")
    p.add_argument("--out", default="-", help="output CSV path (default: stdout)")
    p.add_argument("--snr-db", type=float, help="override downlink SNR in dB")
    p.add_argument("--rho", type=float, help="override Pe / (P0 K)")
    p.add_argument("--T", type=int, help="override coherence interval")
    p.add_argument("--Nt", type=int, help="override BS antenna count")
    if mc:
        p.add_argument("--trials", type=int, default=200)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--workers", type=int, default=1)


def _floats(text):
    return [float(x) for x in text.split(",") if x.strip()]


def cmd_simulate(args):
    cfg = _base_config(args)
    pt = run_point(cfg, args.trials, args.seed, args.workers)
    value = 10 * np.log10(cfg.snr)
    write_csv(args.out, point_rows(pt, "snr", value, ("proposed", "asymptotic")))
    if args.dump_gains:
        g = pt.batch.gains
        dump_gains(args.dump_gains,
                   GainSamples(g=np.sqrt(cfg.P) * g.g, g_eve=g.g_eve))


def cmd_asymptotic(args):
    cfg = _base_config(args)
    rep = asymptotic_rate(cfg)
    fh = sys.stdout if args.out in (None, "-") else open(args.out, "w", newline="")
    try:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["k", "a1", "a2", "gamma_bar", "rate_bits"])
        for k in range(cfg.K):
            w.writerow([k, repr(float(rep.a1[k])), repr(float(rep.a2[k])),
                        repr(float(rep.gamma_bar[k])), repr(float(rep.rate[k]))])
    finally:
        if fh is not sys.stdout:
            fh.close()


def cmd_sweep(args):
    cfg = _base_config(args)
    spec = SweepSpec(axis=args.axis, grid=_floats(args.grid), trials=args.trials,
                     seed=args.seed, schemes=tuple(args.schemes.split(",")),
                     workers=args.workers)
    write_csv(args.out, run_sweep(spec, cfg).rows())


def cmd_compare_mfan(args):
    cfg = _base_config(args)
    phis = tuple(_floats(args.phis)) if args.phis else DEFAULT_PHIS
    schemes = ("proposed", "mfan", "asymptotic")
    pt = run_point(cfg, args.trials, args.seed, args.workers, schemes, phis)
    write_csv(args.out, point_rows(pt, "rho", cfg.rho, schemes))


def cmd_spectrum_dump(args):
    cfg = _base_config(args)
    ss = trial_seed(args.seed, args.trial)
    channels = sample_channels(cfg, ss)
    pilots = build_pilots(cfg.K, cfg.tau)
    obs = assemble_uplink(cfg, channels, pilots, build_attack(cfg, pilots, ss),
                          ss, bs=args.bs)
    prof = order_powers(cfg, args.bs)
    _, eig = estimate_cell(cfg, obs, pilots, prof)
    dump_spectrum(sys.stdout if args.out in (None, "-") else args.out, eig, prof)
    if args.dump_realization:
        dump_matrices(args.dump_realization, {
            "h": channels.h[:, :, args.bs, :], "He": channels.He[args.bs],
            "Yp": obs.Yp, "Yd": obs.Yd})


def cmd_show_config(args):
    json.dump(config_to_dict(_base_config(args)), sys.stdout, indent=2)
    print()


def build_parser():
    ap = argparse.ArgumentParser(
        prog="secmimo",
        description="Secure massive MIMO downlink under an active eavesdropper")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="cmd", required=True)

    p = sub.add_parser("simulate", help="Monte Carlo run at one operating point")
    _common(p)
    p.add_argument("--dump-gains", help="write per-trial gains to this CSV")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("asymptotic", help="closed-form per-user table")
    _common(p, mc=False)
    p.set_defaults(func=cmd_asymptotic)

    p = sub.add_parser("sweep", help="sweep one parameter")
    _common(p)
    p.add_argument("--axis", required=True, choices=AXES)
    p.add_argument("--grid", required=True, help="comma separated values")
    p.add_argument("--schemes", default="proposed,asymptotic",
                   help="comma separated subset of proposed,asymptotic,mfan")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("compare-mfan", help="proposed scheme vs MF-AN baseline")
    _common(p)
    p.add_argument("--phis", help="comma separated information power fractions")
    p.set_defaults(func=cmd_compare_mfan)

    p = sub.add_parser("spectrum-dump", help="Gram eigenvalues of one trial")
    _common(p)
    p.add_argument("--trial", type=int, default=0)
    p.add_argument("--bs", type=int, default=0)
    p.add_argument("--dump-realization", help="write channels and observations")
    p.set_defaults(func=cmd_spectrum_dump)

    p = sub.add_parser("show-config", help="print the resolved scenario as JSON")
    _common(p, mc=False)
    p.set_defaults(func=cmd_show_config)
    return ap


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        args.func(args)
    except ValueError as exc:                         # ConfigError included
        parser.error(str(exc))
    return 0


if __name__ == "__main__":
    sys.exit(main())
