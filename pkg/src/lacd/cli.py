"""Command-line entry point: ``python -m lacd <command> ...``.

Exit codes: 0 success, 1 usage or configuration error, 2 unreadable or
inconsistent input files, 3 fitting failed.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from . import __version__, em, io, logistic, select, simulate
from .errors import ConfigError, DimensionError, FitError, IngestError, JoinError, SelectError
from .metrics import adjusted_rand_index

EXIT_OK, EXIT_USAGE, EXIT_INGEST, EXIT_FIT = 0, 1, 2, 3

log = logging.getLogger("lacd")


def _add_data_args(p):
    p.add_argument("--edges", required=True, type=Path, help="edge list, two identifiers per line")
    p.add_argument("--covariates", required=True, type=Path, help="CSV with header node,<name>,...")
    p.add_argument("--allow-isolated", action="store_true",
                   help="keep covariate-only nodes as isolated nodes")


def _add_fit_args(p, variant_default="robust"):
    p.add_argument("--variant", choices=simulate.VARIANTS, default=variant_default)
    p.add_argument("--restarts", type=int, default=8)
    p.add_argument("--seed", type=int, default=0)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lacd", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="replicated simulation study")
    p.add_argument("--scenario", choices=simulate.SCENARIOS, required=True)
    p.add_argument("--p11", type=float, default=None,
                   help="within-community link probability (table3 default 0.20)")
    p.add_argument("--beta0", type=float, default=0.0, help="logistic intercept (table1/table2)")
    p.add_argument("--replicates", type=int, default=None,
                   help="default 100 (table1/table2) or 50 (table3)")
    p.add_argument("--variant", choices=simulate.VARIANTS, action="append",
                   help="repeatable; default poisson (table1/table2) or robust (table3)")
    p.add_argument("--logistic", action=argparse.BooleanOptionalAction, default=None,
                   help="fit only with (--logistic) or only without (--no-logistic); default both")
    p.add_argument("--k-true", type=int, choices=(2, 5), default=2, help="table3 only")
    p.add_argument("--kmin", type=int, default=1)
    p.add_argument("--kmax", type=int, default=8)
    p.add_argument("--restarts", type=int, default=8)
    p.add_argument("--background-link", choices=("constant", "intensity"), default="constant")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--save-networks", action="store_true")
    p.add_argument("--out", type=Path, required=True, help="output directory")

    p = sub.add_parser("fit", help="fit one model to an edge list and covariates")
    _add_data_args(p)
    p.add_argument("--k", type=int, required=True, help="number of communities")
    _add_fit_args(p)
    p.add_argument("--out", type=Path, required=True, help="report JSON path")
    p.add_argument("--labels", type=Path, help="optional labels CSV path")

    p = sub.add_parser("select", help="choose K by BIC and ICL")
    _add_data_args(p)
    p.add_argument("--kmin", type=int, default=1)
    p.add_argument("--kmax", type=int, default=8)
    p.add_argument("--criterion", choices=("bic", "icl", "both"), default="both")
    _add_fit_args(p)
    p.add_argument("--out", type=Path, help="report JSON path (default stdout)")

    p = sub.add_parser("metrics", help="partition agreement")
    msub = p.add_subparsers(dest="metric", required=True)
    m = msub.add_parser("ari", help="adjusted Rand index of two label files")
    m.add_argument("--a", required=True, type=Path)
    m.add_argument("--b", required=True, type=Path)
    return parser


def _emit(obj, out):
    text = io.dumps_json(obj)
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).parent.mkdir(parents=True, exist_ok=True)
        Path(out).write_text(text, encoding="utf-8")


def cmd_simulate(args, argv):
    seed_note = list(argv)
    if args.scenario == "table3":
        variant = (args.variant or ["robust"])
        if len(variant) != 1:
            raise ConfigError("table3 takes a single --variant")
        spec = simulate.SelectionSpec(
            k_true=args.k_true,
            p11=simulate.synth.SELECTION_P11 if args.p11 is None else args.p11,
            replicates=args.replicates or 50, k_min=args.kmin, k_max=args.kmax,
            variant=variant[0], seed=args.seed, restarts=args.restarts,
            background_link=args.background_link,
        )
        report = simulate.run_selection_study(spec, args.workers, seed_note)
    else:
        if args.p11 is None:
            raise ConfigError("--p11 is required for table1 and table2")
        arms = (True, False) if args.logistic is None else (args.logistic,)
        spec = simulate.SimulationSpec(
            scenario=args.scenario, p11=args.p11, beta0=args.beta0,
            replicates=args.replicates or 100,
            variants=tuple(dict.fromkeys(args.variant or ["poisson"])),
            logistic=arms, seed=args.seed, restarts=args.restarts,
            background_link=args.background_link,
        )
        nets = args.out / "networks" if args.save_networks else None
        report = simulate.run_simulation(spec, args.workers, seed_note, nets)
    path = simulate.write_report(report, args.out)
    for name, agg in report.aggregates.items():
        print(f"{name}: {agg}")
    print(f"report written to {path}")
    return EXIT_OK


def _load(args):
    return io.load_dataset(args.edges, args.covariates, args.allow_isolated)


def cmd_fit(args, argv):
    net, X, names = _load(args)
    options = em.FitOptions(restarts=args.restarts, seed=args.seed)
    res = em.fit(net, X, args.k, args.variant, options)
    se, z, p = logistic.wald_table(X, res.params.beta)
    coef_names = ["(intercept)", *names]
    report = {
        "command": list(argv),
        "n": net.n,
        "n_edges": net.n_edges,
        "K": args.k,
        "variant": args.variant,
        "seed": args.seed,
        "params": res.params.to_dict(),
        "coefficients": [
            {"name": nm, "estimate": float(b), "se": float(s), "z": float(zz), "p_value": float(pp)}
            for nm, b, s, zz, pp in zip(coef_names, res.params.beta, se, z, p)
        ],
        "wald_note": "standard errors from the logistic information matrix at the fitted coefficients; the uncertainty in the relevance posteriors is ignored",
        "pll": res.pll,
        "joint_loglik": select.joint_log_likelihood(net, X, res.c_hat, res.params.beta, args.k),
        "stable": res.stable,
        "outer_iterations": res.outer_iterations,
        "restart_index": res.restart_index,
        "restarts": res.restarts,
        "warnings": res.warnings,
        "group_sizes": np.bincount(res.c_hat, minlength=args.k + 2)[1:].tolist(),
        "labels": dict(zip(net.nodes, res.c_hat.tolist())),
    }
    _emit(report, args.out)
    if args.labels:
        io.write_labels(args.labels, net.nodes, res.c_hat)
    print(f"K={args.k} {args.variant}: group sizes {report['group_sizes']}, "
          f"stable={res.stable}; report written to {args.out}")
    return EXIT_OK


def cmd_select(args, argv):
    net, X, _ = _load(args)
    options = em.FitOptions(restarts=args.restarts, seed=args.seed)
    rep = select.select_k(net, X, range(args.kmin, args.kmax + 1), args.variant, options)
    out = {"command": list(argv), **rep.to_dict()}
    if args.criterion == "bic":
        out.pop("chosen_K_icl")
    elif args.criterion == "icl":
        out.pop("chosen_K_bic")
    _emit(out, args.out)
    if args.out is not None:
        chosen = {k: v for k, v in out.items() if k.startswith("chosen")}
        print(f"{chosen}; report written to {args.out}")
    return EXIT_OK


def cmd_metrics(args, argv):
    nodes_a, nodes_b = io.label_nodes(args.a), io.label_nodes(args.b)
    a = io.load_labels(args.a)
    # align by identifier when both files name their nodes
    b = io.load_labels(args.b, nodes_a if nodes_a is not None and nodes_b is not None else None)
    if a.shape != b.shape:
        raise DimensionError(f"label files differ in length ({a.size} vs {b.size})")
    print(io.format_float(adjusted_rand_index(a, b)))
    return EXIT_OK


COMMANDS = {"simulate": cmd_simulate, "fit": cmd_fit, "select": cmd_select, "metrics": cmd_metrics}


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.WARNING - 10 * min(args.verbose, 2),
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return COMMANDS[args.command](args, argv)
    except (IngestError, JoinError, FileNotFoundError, IsADirectoryError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INGEST
    except (FitError, SelectError) as exc:
        print(f"fit failed: {exc}", file=sys.stderr)
        return EXIT_FIT
    except (ConfigError, DimensionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
