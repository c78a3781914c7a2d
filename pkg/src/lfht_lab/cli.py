"""Command-line interface: gen, test, sweep, boundary, pvalue, verify.

Exit codes: 0 success, 1 configuration error (bad flags, missing or invalid
files), 2 runtime error.  All randomness is traced to --seed; rerunning a
command with the same arguments reproduces its output byte for byte.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import __version__
from .adversarial import Truth
from .baselines import (
    birge_test,
    estimate_pair,
    huber_test,
    np_oracle_test,
    permutation_pvalue,
    scheffe_test,
)
from .dist import ConstructionError, Source, sample
from .harness import (
    ExperimentConfig,
    boundary_phase_points,
    find_boundary,
    make_instance,
    sweep,
    tradeoff_report,
    write_csv,
)
from .l2 import ClassConfig, lfht_test, lfht_test_pd
from .adversarial import ClassTag, fingerprint
from .serialize import (
    dist_from_json,
    dist_to_json,
    load_json,
    read_samples,
    save_json,
    write_samples,
)
from .rng import derive_seed
from .verify import run_suite


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise SystemExit(1)


def build_parser() -> _Parser:
    parser = _Parser(prog="lfht", description=__doc__)
    parser.add_argument("--version", action="version", version=f"lfht-lab {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    gen = sub.add_parser("gen", help="emit a worst-case instance plus sample files")
    gen.add_argument("--class", dest="class_tag", required=True,
                     choices=["db", "d", "h", "g"], help="distribution class")
    gen.add_argument("--k", type=int, help="alphabet size (discrete classes)")
    gen.add_argument("--beta", type=float, help="smoothness (smooth class)")
    gen.add_argument("--d", type=int, help="cube dimension (smooth class)")
    gen.add_argument("--s", type=float, help="sequence smoothness (gaussian class)")
    gen.add_argument("--C", dest="c_class", type=float, help="class radius constant")
    gen.add_argument("--eps", type=float, required=True, help="separation parameter")
    gen.add_argument("--n", type=int, required=True, help="simulated sample size per source")
    gen.add_argument("--m", type=int, required=True, help="observed sample size")
    gen.add_argument("--truth", choices=["null", "alt"], default="null",
                     help="which source generates Z")
    gen.add_argument("--seed", type=int, default=0, help="base seed")
    gen.add_argument("--fingerprint", action="store_true",
                     help="also export the sample fingerprint CSV (discrete only)")
    gen.add_argument("-o", "--out-dir", required=True, help="output directory")

    test = sub.add_parser("test", help="run one decision on sample files")
    test.add_argument("--class", dest="class_tag", required=True,
                      choices=["db", "d", "h", "g"], help="distribution class")
    test.add_argument("--k", type=int, help="alphabet size (discrete classes)")
    test.add_argument("--beta", type=float, help="smoothness (smooth class)")
    test.add_argument("--d", type=int, help="cube dimension (smooth class)")
    test.add_argument("--s", type=float, help="sequence smoothness (gaussian class)")
    test.add_argument("--C", dest="c_class", type=float, default=1.0,
                      help="class radius constant")
    test.add_argument("--eps", type=float, required=True, help="separation parameter")
    test.add_argument("--test", dest="method", default="l2",
                      choices=["l2", "l2_flat", "scheffe", "np", "huber", "birge"],
                      help="decision procedure")
    test.add_argument("--x", required=True, help="X sample file")
    test.add_argument("--y", required=True, help="Y sample file")
    test.add_argument("--z", required=True, help="Z sample file")
    test.add_argument("--instance", help="instance JSON (needed by --test np)")
    test.add_argument("--seed", type=int, default=0, help="seed for randomized steps")
    test.add_argument("--with-diagonal", action="store_true",
                      help="decide on the full statistic including the diagonal")
    test.add_argument("-o", "--out", help="write the report JSON here (default stdout)")

    sw = sub.add_parser("sweep", help="estimate errors over the full n x m grid")
    sw.add_argument("--config", required=True, help="experiment config JSON")
    sw.add_argument("--set", dest="overrides", action="append", default=[],
                    metavar="KEY=VALUE",
                    help="override a config entry after the file parse "
                         "(dotted keys reach into test_params)")
    sw.add_argument("--seed", type=int, help="override the config base seed")
    sw.add_argument("--threads", type=int, help="worker threads (speed only)")
    sw.add_argument("-o", "--out", required=True, help="output CSV path")

    bd = sub.add_parser("boundary", help="search the minimal m per n at target error")
    bd.add_argument("--config", required=True, help="experiment config JSON")
    bd.add_argument("--set", dest="overrides", action="append", default=[],
                    metavar="KEY=VALUE",
                    help="override a config entry after the file parse "
                         "(dotted keys reach into test_params)")
    bd.add_argument("--target", type=float, help="total-error target (default from config)")
    bd.add_argument("--seed", type=int, help="override the config base seed")
    bd.add_argument("-o", "--out", required=True, help="output CSV path")

    pv = sub.add_parser("pvalue", help="permutation p-value for the L2 statistic")
    pv.add_argument("--x", required=True, help="X sample file")
    pv.add_argument("--y", required=True, help="Y sample file")
    pv.add_argument("--z", required=True, help="Z sample file")
    pv.add_argument("--k", type=int, help="alphabet size override")
    pv.add_argument("--permutations", type=int, default=99, help="shuffle count")
    pv.add_argument("--seed", type=int, default=0, help="seed for the shuffles")
    pv.add_argument("-o", "--out", help="write the JSON here (default stdout)")

    vf = sub.add_parser("verify", help="run the oracle suites and print a table")
    vf.add_argument("--quick", action="store_true", help="reduced workloads (< 1 min)")
    return parser


def _emit(doc: dict, out: str | None) -> None:
    text = json.dumps(doc, indent=2, sort_keys=True)
    if out:
        Path(out).write_text(text + "\n")
    else:
        print(text)


def _cmd_gen(args) -> int:
    cfg = ExperimentConfig(
        class_tag=args.class_tag,
        eps=args.eps,
        n_grid=(args.n,),
        m_grid=(args.m,),
        trials=50,
        base_seed=args.seed,
        k=args.k,
        beta=args.beta,
        d=args.d,
        s=args.s,
        c_class=args.c_class,
    )
    inst = make_instance(cfg, derive_seed(args.seed, "instance"))
    truth = Truth.NULL if args.truth == "null" else Truth.ALT
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    x = sample(inst.px, args.n, derive_seed(args.seed, "X"), Source.X)
    y = sample(inst.py, args.n, derive_seed(args.seed, "Y"), Source.Y)
    z_dist = inst.px if truth is Truth.NULL else inst.py
    z = sample(z_dist, args.m, derive_seed(args.seed, "Z"), Source.Z)
    write_samples(x, out / "x.samp")
    write_samples(y, out / "y.samp")
    write_samples(z, out / "z.samp")
    save_json(
        {
            "class": inst.class_tag.value,
            "eps": inst.eps,
            "separation": inst.separation,
            "truth": args.truth,
            "metadata": inst.metadata,
            "px": dist_to_json(inst.px),
            "py": dist_to_json(inst.py),
            "seed": args.seed,
        },
        out / "instance.json",
    )
    if args.fingerprint:
        fingerprint([x, y, z], k=x.dim).to_csv(out / "fingerprint.csv")
    print(f"wrote instance and samples to {out}")
    return 0


_TAGS = {"db": ClassTag.P_DB, "d": ClassTag.P_D, "h": ClassTag.P_H, "g": ClassTag.P_G}


def _cmd_test(args) -> int:
    x = read_samples(args.x)
    y = read_samples(args.y)
    z = read_samples(args.z)
    k = args.k or max(x.dim, y.dim, z.dim)
    if args.method == "l2":
        cfg = ClassConfig(
            tag=_TAGS[args.class_tag], eps=args.eps, k=args.k, beta=args.beta,
            d=args.d, s=args.s, c_sob=args.c_class,
            use_diagonal=args.with_diagonal,
        )
        report = lfht_test(x, y, z, cfg)
    elif args.method == "l2_flat":
        report = lfht_test_pd(x, y, z, k, args.eps, args.seed)
    elif args.method == "np":
        if not args.instance:
            raise ConstructionError("--test np requires --instance")
        doc = load_json(args.instance)
        decision = np_oracle_test(
            dist_from_json(doc["px"]), dist_from_json(doc["py"]), z
        )
        _emit({"decision": decision, "test": "np"}, args.out)
        return 0
    else:
        est = estimate_pair(x, y, k)
        if args.method == "scheffe":
            decision = scheffe_test(est, z)
        elif args.method == "huber":
            decision = huber_test(est, z, args.eps)
        else:
            decision = birge_test(est, z)
        _emit({"decision": decision, "test": args.method}, args.out)
        return 0
    _emit(
        {
            "t_lf": None if report.t_lf != report.t_lf else report.t_lf,
            "t_lf_nodiag": None
            if report.t_lf_nodiag != report.t_lf_nodiag
            else report.t_lf_nodiag,
            "diagonal": report.diagonal,
            "decision": report.decision,
            "basis_r": report.basis.r,
            "test": args.method,
            "extras": {k2: str(v) for k2, v in report.extras.items()},
        },
        args.out,
    )
    return 0


def _apply_override(doc: dict, entry: str) -> None:
    if "=" not in entry:
        raise ConstructionError(f"override {entry!r} is not KEY=VALUE")
    key, raw = entry.split("=", 1)
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    target = doc
    parts = key.split(".")
    for part in parts[:-1]:
        target = target.setdefault(part, {})
        if not isinstance(target, dict):
            raise ConstructionError(f"override {key!r} descends into a scalar")
    target[parts[-1]] = value


def _load_config(args) -> ExperimentConfig:
    doc = load_json(args.config)
    for entry in getattr(args, "overrides", []):
        _apply_override(doc, entry)
    if getattr(args, "seed", None) is not None:
        doc["base_seed"] = args.seed
    if getattr(args, "threads", None):
        doc["threads"] = args.threads
    return ExperimentConfig.from_json(doc)


def _cmd_sweep(args) -> int:
    cfg = _load_config(args)
    points = sweep(cfg)
    write_csv(args.out, cfg, points, seed=cfg.base_seed)
    print(f"wrote {len(points)} grid points to {args.out}")
    return 0


def _cmd_boundary(args) -> int:
    cfg = _load_config(args)
    curve = find_boundary(cfg, target=args.target)
    points, flags = boundary_phase_points(cfg, curve)
    write_csv(args.out, cfg, points, seed=cfg.base_seed, flags=flags)
    closed = sum(1 for p in curve.points if p.flag == "OK")
    print(f"boundary: {closed}/{len(curve.points)} points closed, "
          f"{curve.raw_violations} raw monotonicity violations")
    if closed >= 4:
        summary = tradeoff_report(curve)
        print(
            f"log-log slope {summary.slope:.3f}, "
            f"product spread {summary.product_spread:.2f}"
        )
    return 0


def _cmd_pvalue(args) -> int:
    x = read_samples(args.x)
    y = read_samples(args.y)
    z = read_samples(args.z)
    report = permutation_pvalue(
        x, y, z, permutations=args.permutations, seed=args.seed,
    )
    _emit(
        {"p_value": report.p_value, "t_obs": report.t_obs, "P": report.permutations},
        args.out,
    )
    return 0


def _cmd_verify(args) -> int:
    results = run_suite(quick=args.quick)
    width = max(len(r.name) for r in results)
    failures = 0
    for r in results:
        status = "PASS" if r.passed else "FAIL"
        failures += not r.passed
        print(f"{r.name:<{width}}  {status}  {r.detail}")
    print(f"{failures} failures / {len(results)} checks")
    return 0 if failures == 0 else 2


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    handlers = {
        "gen": _cmd_gen,
        "test": _cmd_test,
        "sweep": _cmd_sweep,
        "boundary": _cmd_boundary,
        "pvalue": _cmd_pvalue,
        "verify": _cmd_verify,
    }
    try:
        return handlers[args.command](args)
    except (ConstructionError, FileNotFoundError, json.JSONDecodeError, KeyError,
            TypeError) as exc:
        print(f"lfht: config error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        print(f"lfht: runtime error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
