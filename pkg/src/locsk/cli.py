"""Command-line interface.

Exit codes: 0 on success, 2 on validation errors (bad flags, violated
preconditions), 3 on numerical failures.
"""

import argparse
import json
import math
import sys

from . import backend
from .analytic import AnalyticSolution
from .exceptions import LocskNumericalError, LocskValidationError
from .harness import (
    BETA_GUARD,
    ExperimentConfig,
    dumps_json,
    run_experiment,
    write_result,
)
from .kernel import check_hypothesis2, default_kernel, load_kernel
from .lattice import LatticeBox
from .mcmc import run_replica_chain
from .model import exact_log_partition, sample_disorder
from .seeds import derive_seed


def _kernel_from(args):
    return load_kernel(args.kernel_file) if args.kernel_file else default_kernel()


def _emit(text, out):
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _guard_beta(beta, allow):
    if beta > BETA_GUARD and not allow:
        raise LocskValidationError(
            f"beta={beta} exceeds the high-temperature guard {BETA_GUARD}; "
            "pass --allow-large-beta to override"
        )


def _add_model_flags(p, box_required=True):
    p.add_argument("--kernel-file", default=None, help="kernel JSON file (default: 1 + cos)")
    p.add_argument("--dim", type=int, default=1)
    p.add_argument("--box-n", type=int, action="append", default=None,
                   help="box radius; repeat for several sizes", required=box_required)
    p.add_argument("--beta", type=float, default=0.2)
    p.add_argument("--field", type=float, default=0.3, help="external field h")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--allow-large-beta", action="store_true")


def _add_output_flags(p):
    p.add_argument("--out", default=None)
    p.add_argument("--format", dest="fmt", choices=("csv", "json"), default=None)


def build_parser():
    ap = argparse.ArgumentParser(prog="locsk",
                                 description="localized spin-glass simulation lab")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analytic", help="replica-symmetric quantities at one point")
    p.add_argument("--beta", type=float, required=True)
    p.add_argument("--field", type=float, required=True)
    p.add_argument("--gamma0", type=float, default=1.0)
    p.add_argument("--quad-nodes", type=int, default=61)
    p.add_argument("--tol", type=float, default=1e-12)
    _add_output_flags(p)

    p = sub.add_parser("kernel", help="validate and describe a kernel file")
    p.add_argument("--kernel-file", default=None)
    _add_output_flags(p)

    p = sub.add_parser("exact", help="exact log-partition for one disorder draw")
    _add_model_flags(p)
    _add_output_flags(p)

    p = sub.add_parser("mcmc", help="two-replica overlap moments by heat bath")
    _add_model_flags(p)
    p.add_argument("--sweeps", type=int, default=4000)
    p.add_argument("--burn-in", type=int, default=500)
    p.add_argument("--thin", type=int, default=2)
    p.add_argument("--quad-nodes", type=int, default=61)
    p.add_argument("--tol", type=float, default=1e-12)
    _add_output_flags(p)

    for kind, extra in (
        ("interp", ("paths", "grid")),
        ("convergence", ()),
        ("clt", ()),
        ("overlap-decay", ("sweeps", "burn-in", "thin")),
        ("derivative-check", ()),
    ):
        p = sub.add_parser(kind, help=f"run the {kind} experiment")
        p.add_argument("--config", default=None, help="JSON file with the full config")
        p.add_argument("--kernel-file", default=None)
        p.add_argument("--dim", type=int, default=None)
        p.add_argument("--box-n", type=int, action="append", default=None)
        p.add_argument("--beta", type=float, default=None)
        p.add_argument("--field", type=float, default=None)
        p.add_argument("--samples", type=int, default=None)
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--workers", type=int, default=None)
        p.add_argument("--allow-large-beta", action="store_true", default=None)
        p.add_argument("--quad-nodes", type=int, default=None)
        p.add_argument("--tol", type=float, default=None)
        if "sweeps" in extra:
            p.add_argument("--sweeps", type=int, default=None)
            p.add_argument("--burn-in", type=int, default=None)
            p.add_argument("--thin", type=int, default=None)
        if "paths" in extra:
            p.add_argument("--paths", type=int, default=None)
            p.add_argument("--grid", type=int, default=None, help="time grid points")
        _add_output_flags(p)

    p = sub.add_parser("backend", help="report the selected compute backend")
    return ap


def _run_analytic(args) -> str:
    sol = AnalyticSolution.solve(args.beta, args.field, args.gamma0,
                                 nodes=args.quad_nodes, tol=args.tol)
    record = {
        "beta": sol.beta, "h": sol.h, "gamma0": sol.gamma0, "r": sol.r, "s": sol.s,
        "sk": sol.sk_value, "p": sol.p_value, "tau_hat": sol.tau_hat, "tau": sol.tau,
        "notes": list(sol.notes),
    }
    return dumps_json(record) + "\n"


def _run_kernel(args) -> str:
    spec = _kernel_from(args)
    dhat, ok = check_hypothesis2(spec)
    record = {
        "d": spec.dim,
        "modes": [{"k": list(k), "gamma": g} for k, g in spec.modes],
        "gamma0": spec.gamma0,
        "Gamma": spec.gamma_sum,
        "max_valid_dhat": dhat,
        "hypothesis2_satisfied": ok,
        "dhat_max": spec.dhat_max,
    }
    return dumps_json(record) + "\n"


def _run_exact(args) -> str:
    spec = _kernel_from(args)
    box = LatticeBox(args.dim, args.box_n[0])
    disorder = sample_disorder(box, args.seed)
    logz, pn = exact_log_partition(disorder, spec, args.beta, args.field)
    return dumps_json({"logZ": logz, "pN": pn, "seed": args.seed}) + "\n"


def _run_mcmc(args) -> str:
    from .analytic import solve_r

    _guard_beta(args.beta, args.allow_large_beta)
    spec = _kernel_from(args)
    box = LatticeBox(args.dim, args.box_n[0])
    disorder = sample_disorder(box, derive_seed(args.seed, "mcmc", 0))
    r = solve_r(args.beta, args.field, spec.gamma0, args.tol,
                nodes=args.quad_nodes) if args.field > 0 else 0.0
    est = run_replica_chain(disorder, spec, args.beta, args.field, r,
                            args.sweeps, args.burn_in, args.thin,
                            derive_seed(args.seed, "chain", 0))
    record = {
        "box_n": args.box_n[0], "beta": args.beta, "h": args.field, "r": r,
        "seed": args.seed, "sweeps": args.sweeps, "burn_in": args.burn_in,
        "thin": args.thin,
        "nu_overlap": est.nu_overlap, "se_overlap": est.se_overlap,
        "nu_overlap_sq": est.nu_overlap_sq, "se_overlap_sq": est.se_overlap_sq,
        "modes": [
            {"k": list(k), "gamma": g, "nu_mode_sq": float(v), "se": float(se)}
            for (k, g, v, se) in zip(est.modes, est.gammas, est.nu_mode_sq, est.se_mode_sq)
        ],
        "weighted_sum": est.weighted_sum, "se_weighted": est.se_weighted,
    }
    return dumps_json(record) + "\n"


_CONFIG_KEYS = ("kernel_file", "dim", "beta", "samples", "seed", "workers",
                "allow_large_beta", "quad_nodes", "tol", "sweeps", "burn_in",
                "thin", "paths")


def _experiment_config(kind, args) -> ExperimentConfig:
    base = {}
    if args.config:
        with open(args.config) as fh:
            base = json.load(fh)
        if base.get("kind", kind) != kind:
            raise LocskValidationError(
                f"config file is for kind {base['kind']!r}, not {kind!r}"
            )
    base["kind"] = kind
    for key in _CONFIG_KEYS:
        val = getattr(args, key, None)
        if val is not None:
            base[key] = val
    if getattr(args, "field", None) is not None:
        base["h"] = args.field
    if getattr(args, "box_n", None):
        base["box_sizes"] = tuple(args.box_n)
    if getattr(args, "grid", None) is not None:
        base["grid_points"] = args.grid
    if args.fmt is not None:
        base["fmt"] = args.fmt
    return ExperimentConfig.from_dict(base)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "analytic":
            _emit(_run_analytic(args), args.out)
        elif args.command == "kernel":
            _emit(_run_kernel(args), args.out)
        elif args.command == "exact":
            _emit(_run_exact(args), args.out)
        elif args.command == "mcmc":
            _emit(_run_mcmc(args), args.out)
        elif args.command == "backend":
            sys.stdout.write(f"{backend.active()} (available: {', '.join(backend.available())})\n")
        else:
            kind = "interp-check" if args.command == "interp" else args.command
            config = _experiment_config(kind, args).validate()
            result = run_experiment(config)
            text = write_result(result, args.out, config.fmt)
            if not args.out:
                sys.stdout.write(text)
    except LocskValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except LocskNumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
