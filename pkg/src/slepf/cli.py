"""Command-line front end.

Subcommands: params, pf eval, pf verify, mc estimate, sle sample,
ising crossing, fusion check, coulomb check.  Exit codes: 0 success/pass,
1 verification failure, 2 usage error.  Every stochastic run carries an
explicit seed (flag, config file, or the SLEPF_SEED environment variable);
artifacts embed the resolved configuration.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys

import numpy as np

from . import verify
from .exact_pf import z_total, z_value
from .ising import IsingConfig, corner_marks, crossing_experiment
from .linkpat import parse_pattern
from .loewner import sample_driving, trace_curve
from .mc_pf import CascadeConfig, estimate_z
from .params import derive_params


def _load_config_file(path):
    with open(path, "rb") as fh:
        blob = fh.read()
    if path.endswith(".toml"):
        import tomllib
        return tomllib.loads(blob.decode())
    return json.loads(blob.decode())


def _resolve_seed(args):
    if getattr(args, "seed", None) is not None:
        return args.seed
    env = os.environ.get("SLEPF_SEED")
    if env is not None:
        return int(env)
    return 0


def _emit(args, text):
    if getattr(args, "out", None):
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _emit_json(args, payload):
    _emit(args, json.dumps(payload, indent=2, default=str) + "\n")


def _csv_text(header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\r\n")
    w.writerow(header)
    for row in rows:
        w.writerow(row)
    return buf.getvalue()


def _cmd_params(args):
    p = derive_params(args.kappa)
    _emit_json(args, p.as_dict())
    return 0


def _cmd_pf_eval(args):
    alpha = parse_pattern(args.alpha)
    pts = tuple(float(x) for x in args.points.split(","))
    value = z_value(args.kappa, alpha, pts)
    payload = {
        "value": value,
        "config": {"command": "pf eval", "kappa": args.kappa,
                   "alpha": str(alpha), "points": list(pts)},
    }
    if args.total:
        payload["total"] = z_total(args.kappa, pts)
        payload["ratio"] = value / payload["total"]
    _emit_json(args, payload)
    return 0


_VERIFY_SUITES = {
    "pde": lambda args: verify.suite_pde(kappas=(args.kappa,) if args.kappa else (3.0, 4.0, 6.0)),
    "cov": lambda args: verify.suite_cov(),
    "asy": lambda args: verify.suite_asy(kappa=args.kappa or 3.0),
    "bounds": lambda args: verify.suite_bounds(),
    "martingale": lambda args: verify.suite_martingale(),
}


def _cmd_pf_verify(args):
    report = _VERIFY_SUITES[args.suite](args)
    report["config"] = {"command": "pf verify", "suite": args.suite,
                        "kappa": args.kappa}
    _emit_json(args, report)
    return 0 if report["passed"] else 1


def _cmd_mc_estimate(args):
    alpha = parse_pattern(args.alpha)
    pts = tuple(float(x) for x in args.points.split(","))
    link_choice = "first"
    link = None
    if args.link:
        link_choice = "fixed"
        a, _, b = args.link.partition("-")
        link = (int(a), int(b))
    cfg = CascadeConfig(
        kappa=args.kappa, alpha=alpha, pts=pts, samples=args.samples,
        dt=args.dt, stop_epsilon=args.stop_eps, seed=_resolve_seed(args),
        link_choice=link_choice, link=link, threads=args.threads,
    )
    est = estimate_z(cfg)
    _emit_json(args, {
        "mean": est.value,
        "se": est.abs_error,
        "samples": cfg.samples,
        "diagnostics": est.diagnostics,
        "config": {"command": "mc estimate", "kappa": cfg.kappa,
                   "alpha": str(alpha), "points": list(pts),
                   "samples": cfg.samples, "dt": cfg.dt,
                   "stop_epsilon": cfg.stop_epsilon, "seed": cfg.seed,
                   "link_choice": link_choice,
                   "link": list(link) if link else None,
                   "threads": cfg.threads},
    })
    return 0


def _cmd_sle_sample(args):
    seed = _resolve_seed(args)
    drv = sample_driving(args.kappa, args.steps * args.dt, args.dt, seed)
    header = ["t", "w", "kappa", "dt", "seed"]
    rows = [[i * drv.dt, drv.samples[i], args.kappa, args.dt, seed]
            for i in range(len(drv.samples))]
    if args.trace:
        stride = max(1, args.steps // args.trace_points)
        pts = trace_curve(drv, stride=stride)
        header += ["curve_re", "curve_im"]
        for row in rows:
            row += ["", ""]
        for k, z in enumerate(pts):
            rows[(k + 1) * stride][5:7] = [z.real, z.imag]
    _emit(args, _csv_text(header, rows))
    return 0


def _cmd_ising_crossing(args):
    seed = _resolve_seed(args)
    if args.arcs == "corners":
        marks = corner_marks(args.width, args.height)
    else:
        marks = tuple(int(x) for x in args.arcs.split(","))
    cfg = IsingConfig(
        width=args.width, height=args.height, marks=marks,
        sweeps_between=args.sweeps, burn_in=args.burn_in,
        samples=args.samples, n_chains=args.chains, seed=seed,
    )
    res = crossing_experiment(cfg, threads=args.threads,
                              predict=not args.no_predict)
    header = ["alpha", "empirical", "stderr", "predicted",
              "width", "height", "sweeps", "samples", "seed"]
    patterns = sorted(set(res.frequencies) | set(res.predicted or {}),
                      key=lambda a: a.links)
    rows = []
    for a in patterns:
        rows.append([
            str(a),
            res.frequencies.get(a, 0.0),
            res.stderr.get(a, 0.0),
            res.predicted.get(a, "") if res.predicted else "",
            args.width, args.height, args.sweeps, res.n_samples, seed,
        ])
    _emit(args, _csv_text(header, rows))
    return 0


def _cmd_fusion_check(args):
    report = verify.suite_fusion()
    report["config"] = {"command": "fusion check", "kappa": args.kappa}
    _emit_json(args, report)
    return 0 if report["passed"] else 1


def _cmd_coulomb_check(args):
    kappas = (args.kappa,) if args.kappa else (4.5, 5.0, 5.5, 6.0, 6.5, 7.0)
    report = verify.suite_coulomb(kappas=kappas, n_configs=args.configs)
    report["config"] = {"command": "coulomb check", "kappas": list(kappas)}
    _emit_json(args, report)
    return 0 if report["passed"] else 1


def build_parser():
    top = argparse.ArgumentParser(prog="slepf", description=__doc__)
    top.add_argument("--config", help="JSON or TOML file with default arguments")
    sub = top.add_subparsers(dest="command", required=True)

    p = sub.add_parser("params", help="conformal constants derived from kappa")
    p.add_argument("--kappa", type=float, required=True)
    p.add_argument("--out")
    p.set_defaults(fn=_cmd_params)

    pf = sub.add_parser("pf", help="exact partition functions")
    pfsub = pf.add_subparsers(dest="pf_command", required=True)
    p = pfsub.add_parser("eval")
    p.add_argument("--kappa", type=float, required=True)
    p.add_argument("--alpha", required=True, help="e.g. '1-2,3-4'")
    p.add_argument("--points", required=True, help="comma-separated reals")
    p.add_argument("--total", action="store_true",
                   help="also emit the total and the ratio")
    p.add_argument("--out")
    p.set_defaults(fn=_cmd_pf_eval)
    p = pfsub.add_parser("verify")
    p.add_argument("--suite", choices=sorted(_VERIFY_SUITES), required=True)
    p.add_argument("--kappa", type=float)
    p.add_argument("--out")
    p.set_defaults(fn=_cmd_pf_verify)

    mc = sub.add_parser("mc", help="Monte-Carlo cascade estimates")
    mcsub = mc.add_subparsers(dest="mc_command", required=True)
    p = mcsub.add_parser("estimate")
    p.add_argument("--kappa", type=float, required=True)
    p.add_argument("--alpha", required=True)
    p.add_argument("--points", required=True)
    p.add_argument("--samples", type=int, default=100_000)
    p.add_argument("--dt", type=float, default=5e-4)
    p.add_argument("--stop-eps", type=float, default=1e-3, dest="stop_eps")
    p.add_argument("--seed", type=int)
    p.add_argument("--link", help="fixed link, e.g. '1-4'")
    p.add_argument("--threads", type=int, default=verify._default_threads())
    p.add_argument("--out")
    p.set_defaults(fn=_cmd_mc_estimate)

    sle = sub.add_parser("sle", help="chordal SLE sampling")
    slesub = sle.add_subparsers(dest="sle_command", required=True)
    p = slesub.add_parser("sample")
    p.add_argument("--kappa", type=float, required=True)
    p.add_argument("--steps", type=int, default=10_000)
    p.add_argument("--dt", type=float, default=1e-4)
    p.add_argument("--seed", type=int)
    p.add_argument("--trace", action="store_true",
                   help="include zipper-traced curve points")
    p.add_argument("--trace-points", type=int, default=200)
    p.add_argument("--out")
    p.set_defaults(fn=_cmd_sle_sample)

    isg = sub.add_parser("ising", help="critical Ising interface statistics")
    isgsub = isg.add_subparsers(dest="ising_command", required=True)
    p = isgsub.add_parser("crossing")
    p.add_argument("--width", type=int, required=True)
    p.add_argument("--height", type=int, required=True)
    p.add_argument("--arcs", default="corners",
                   help="'corners' or comma-separated perimeter positions")
    p.add_argument("--sweeps", type=int, default=5)
    p.add_argument("--burn-in", type=int, default=1000, dest="burn_in")
    p.add_argument("--samples", type=int, default=10_000)
    p.add_argument("--chains", type=int, default=100)
    p.add_argument("--seed", type=int)
    p.add_argument("--threads", type=int, default=verify._default_threads())
    p.add_argument("--no-predict", action="store_true")
    p.add_argument("--out")
    p.set_defaults(fn=_cmd_ising_crossing)

    fus = sub.add_parser("fusion", help="fusion-layer checks")
    fussub = fus.add_subparsers(dest="fusion_command", required=True)
    p = fussub.add_parser("check")
    p.add_argument("--kappa", type=float)
    p.add_argument("--out")
    p.set_defaults(fn=_cmd_fusion_check)

    cou = sub.add_parser("coulomb", help="screening-integral oracle checks")
    cousub = cou.add_subparsers(dest="coulomb_command", required=True)
    p = cousub.add_parser("check")
    p.add_argument("--kappa", type=float)
    p.add_argument("--configs", type=int, default=20)
    p.add_argument("--out")
    p.set_defaults(fn=_cmd_coulomb_check)

    return top


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.config:
        defaults = _load_config_file(args.config)
        for key, val in defaults.items():
            attr = key.replace("-", "_")
            if hasattr(args, attr) and getattr(args, attr) in (None, False):
                setattr(args, attr, val)
    try:
        return args.fn(args)
    except (ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
