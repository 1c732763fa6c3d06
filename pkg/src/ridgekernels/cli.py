"""Command-line interface.

Subcommands: train, evaluate, approx-check, mercer-check, poly-check,
report.  A key=value config file can preload defaults for any flag; flags
given explicitly win.  All randomness is governed by --seed.  Exit code 0
on success, 2 on any named error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from .dataset import ParseError, load_csv, standardize
from .kernels import ThetaParams
from .krr import NeumannDivergenceError, SingularMatrixError
from .mercer import SignedFeatureModel, frame_condition, min_eigenvalue_sym
from .optim import OptimConfig
from .pipeline import (
    TrainedPipeline,
    accuracy,
    classify_batch,
    pca,
    pipeline_from_text,
    pipeline_to_text,
    render_markdown_table,
    run_experiment,
    train_ovr,
)
from .ridgepoly import (
    failing_group,
    in_closure_homogeneous,
    membership_witness,
    parse_mpoly,
    vanishes_on_L,
)
from .shift_approx import CompactBox, GaussianKernel, phase_discretize, sample_rff_theta, sup_error


def _load_config_tokens(path: str) -> list[str]:
    """Turn key=value lines into CLI tokens (prepended, so real flags win)."""
    tokens = []
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ParseError(f"config line is not key=value: {line!r}", line=lineno)
        key, value = line.split("=", 1)
        tokens += [f"--{key.strip()}", value.strip()]
    return tokens


def _parse_box(spec: str, dim: int) -> CompactBox:
    """Parse 'LO..HI' into a cube of the given dimension."""
    try:
        lo_txt, hi_txt = spec.split("..")
        lo, hi = float(lo_txt), float(hi_txt)
    except ValueError:
        raise ValueError(f"box must look like LO..HI, got {spec!r}") from None
    return CompactBox(lo=[lo] * dim, hi=[hi] * dim)


def _write_or_print(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


# -- subcommands ---------------------------------------------------------------


def cmd_train(args) -> int:
    ds = load_csv(args.data)
    ds_std, stats = standardize(ds)
    config = OptimConfig(
        max_iters=args.max_iters,
        loss_mode=args.solver,
        neumann_order=args.neumann_order,
        positivity=not args.allow_negative,
    )
    seeds = [args.seed + i for i in range(args.seeds)]
    ovr = train_ovr(
        ds_std, m=args.m, lam=args.lam, activation=args.activation,
        loss_mode=args.solver, seeds=seeds, neumann_order=args.neumann_order,
        config=config,
    )
    pipe = TrainedPipeline(stats=stats, ovr=ovr)
    Path(args.out).write_text(pipeline_to_text(pipe))
    acc = accuracy(ovr, ds_std)
    print(f"trained {ds.n_classes} binary models on {ds.n} rows; training accuracy {acc:.4f}")
    for name, status, loss in zip(ovr.class_names, ovr.statuses, ovr.losses):
        print(f"  class {name}: status={status} loss={loss:.6g}")
    print(f"model written to {args.out}")
    return 0


def cmd_evaluate(args) -> int:
    pipe = pipeline_from_text(Path(args.model).read_text())
    ds = load_csv(args.data)
    X_std = pipe.stats.transform(ds.X)
    predicted = classify_batch(pipe.ovr, X_std)
    acc = float(np.mean(predicted == ds.labels))
    fmt = args.format or ("md" if args.report and args.report.endswith(".md") else "csv")
    if fmt == "csv":
        coords = pca(X_std, 2).project(X_std)
        lines = ["pc1,pc2,true_label,predicted_label"]
        for (p1, p2), t, p in zip(coords, ds.labels, predicted):
            lines.append(f"{float(p1)!r},{float(p2)!r},{t},{p}")
        text = "\n".join(lines) + "\n"
    else:
        lines = [
            "| Metric | Value |",
            "| --- | --- |",
            f"| rows | {ds.n} |",
            f"| accuracy | {acc:.4f} |",
        ]
        for k, name in enumerate(ds.class_names, start=1):
            mask = ds.labels == k
            class_acc = float(np.mean(predicted[mask] == k)) if mask.any() else float("nan")
            lines.append(f"| accuracy[{name}] | {class_acc:.4f} |")
        text = "\n".join(lines) + "\n"
    _write_or_print(text, args.report)
    print(f"accuracy {acc:.4f} on {ds.n} rows")
    return 0


def cmd_approx_check(args) -> int:
    target = GaussianKernel(args.gamma)
    box = _parse_box(args.box, args.dim)
    m1_values = [int(tok) for tok in args.m1_list.replace(",", " ").split()]
    lines = ["m1,seed,sup_error"]
    for m1 in m1_values:
        for s in range(args.seeds):
            seed = args.seed + s
            theta = sample_rff_theta(args.gamma, m1, args.dim, seed)
            theta = phase_discretize(theta, args.m2)
            err = sup_error(target, theta, box, args.grid)
            lines.append(f"{m1},{seed},{err!r}")
    text = "\n".join(lines) + "\n"
    _write_or_print(text, args.out)
    if args.out:
        print(f"wrote {len(lines) - 1} rows to {args.out}")
    return 0


def cmd_mercer_check(args) -> int:
    plus, minus = [], []
    for lineno, raw in enumerate(Path(args.vectors).read_text().splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        fields = [f.strip() for f in line.split(",")]
        sign, vals = fields[0], fields[1:]
        if sign not in ("+", "-"):
            raise ParseError(f"first field must be + or -, got {sign!r}", line=lineno)
        try:
            vec = [float(v) for v in vals]
        except ValueError:
            raise ParseError("non-numeric vector entry", line=lineno) from None
        (plus if sign == "+" else minus).append(vec)
    model = SignedFeatureModel(v_plus=np.array(plus), v_minus=np.array(minus))
    verdict = frame_condition(model)
    min_eig = min_eigenvalue_sym(model.difference_gram())
    print(f"min eigenvalue: {min_eig!r}")
    print("mercer on sample: yes" if verdict else "mercer on sample: no")
    return 0


def cmd_poly_check(args) -> int:
    poly = parse_mpoly(args.expr)
    vanishes = vanishes_on_L(poly)
    if vanishes:
        print("vanishes on the ridge planes: yes")
    else:
        s, l, total = failing_group(poly)
        print("vanishes on the ridge planes: no")
        print(f"  witness: coefficient group s={s}, level={l} sums to {total}")
        point = _numeric_witness(poly, seed=args.seed)
        if point is not None:
            z, val = point
            print(f"  witness point (alpha*w, beta*w): {np.round(z, 6).tolist()} -> value {val:.6g}")
    if args.membership:
        parts = poly.homogeneous_components()
        for k in sorted(parts):
            part = parts[k]
            member = in_closure_homogeneous(part)
            tag = f"degree-{k} part" if len(parts) > 1 else "polynomial"
            if member:
                print(f"membership ({tag}): inside the ridge-product closure")
            else:
                b, res = membership_witness(part)
                print(f"membership ({tag}): outside the ridge-product closure")
                print(f"  witness: ({b})(D) applied to it gives {res}, not 0")
    return 0


def _numeric_witness(poly, seed: int = 0, tries: int = 1000):
    """A point of the ridge planes where the polynomial is visibly nonzero."""
    n = poly.n_vars // 2
    rng = np.random.default_rng(seed)
    for _ in range(tries):
        alpha, beta = rng.normal(size=2)
        w = rng.normal(size=n)
        z = np.concatenate([alpha * w, beta * w])
        val = float(poly.eval_many(z[None, :])[0])
        scale = float(poly.eval_scale(z[None, :])[0])
        if abs(val) > 1e-6 * max(scale, 1e-300):
            return z, val
    return None


def cmd_report(args) -> int:
    if not args.run_table1:
        raise ValueError("report currently supports --run-table1 only")
    ds = load_csv(args.data)
    seeds = [args.seed + i for i in range(args.seeds)]
    rows = run_experiment(
        ds, seeds=seeds, m=args.m, lam=args.lam,
        neumann_order=args.neumann_order,
        config_overrides={"max_iters": args.max_iters},
    )
    text = render_markdown_table(rows)
    _write_or_print(text, args.out)
    return 0


# -- parser ----------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ridgekernels",
        description="Ridge-function kernel machines: training, certification, and checks.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--config", help="key=value file preloading defaults for this command")
        p.add_argument("--seed", type=int, default=0, help="base seed for all randomness")

    p = sub.add_parser("train", help="fit a one-vs-rest ridge-kernel classifier")
    add_common(p)
    p.add_argument("--data", required=True, help="CSV with numeric features and a label column")
    p.add_argument("--activation", choices=["cos", "relu"], default="cos")
    p.add_argument("--solver", choices=["qr", "neumann"], default="qr")
    p.add_argument("--neumann-order", type=int, default=5)
    p.add_argument("--m", type=int, default=2, help="number of kernel terms")
    p.add_argument("--lambda", dest="lam", type=float, default=0.01)
    p.add_argument("--seeds", type=int, default=10, help="number of optimizer restarts")
    p.add_argument("--max-iters", type=int, default=30)
    p.add_argument("--allow-negative", action="store_true",
                   help="do not constrain term weights to be positive")
    p.add_argument("--out", required=True, help="path of the model file to write")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("evaluate", help="score a trained model on a CSV")
    add_common(p)
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--report", help="write the report here (stdout when omitted)")
    p.add_argument("--format", choices=["csv", "md"],
                   help="report format; inferred from --report extension by default")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("approx-check", help="sup-error of the cosine approximation to a Gaussian")
    add_common(p)
    p.add_argument("--gamma", type=float, default=1.0)
    p.add_argument("--m1-list", default="100,400,1600", help="feature counts, comma separated")
    p.add_argument("--m2", type=int, default=3, help="phase count of the discretization")
    p.add_argument("--box", default="-1..1", help="per-axis interval LO..HI")
    p.add_argument("--dim", type=int, default=2)
    p.add_argument("--grid", type=int, default=17, help="lattice points per axis")
    p.add_argument("--seeds", type=int, default=20, help="number of seeds per feature count")
    p.add_argument("--out", help="CSV output path (stdout when omitted)")
    p.set_defaults(func=cmd_approx_check)

    p = sub.add_parser("mercer-check", help="frame criterion for a signed feature model")
    add_common(p)
    p.add_argument("--vectors", required=True,
                   help="CSV rows: +/- sign, then the vector entries")
    p.set_defaults(func=cmd_mercer_check)

    p = sub.add_parser("poly-check", help="vanishing/membership verdicts for a polynomial")
    add_common(p)
    p.add_argument("--expr", required=True, help='e.g. "x1 y2 - x2 y1"')
    p.add_argument("--membership", action="store_true",
                   help="also test membership in the ridge-product closure")
    p.set_defaults(func=cmd_poly_check)

    p = sub.add_parser("report", help="run the multi-seed accuracy experiment")
    add_common(p)
    p.add_argument("--run-table1", action="store_true",
                   help="train/evaluate every solver-activation combination")
    p.add_argument("--data", required=True)
    p.add_argument("--m", type=int, default=2)
    p.add_argument("--lambda", dest="lam", type=float, default=0.01)
    p.add_argument("--neumann-order", type=int, default=5)
    p.add_argument("--seeds", type=int, default=10)
    p.add_argument("--max-iters", type=int, default=30)
    p.add_argument("--out", help="write the markdown report here")
    p.set_defaults(func=cmd_report)

    return parser


def _expand_config(argv: list[str]) -> list[str]:
    """Insert config-file tokens right after the subcommand so flags override."""
    if "--config" not in argv:
        return argv
    idx = argv.index("--config")
    if idx + 1 >= len(argv):
        raise ValueError("--config requires a path")
    tokens = _load_config_tokens(argv[idx + 1])
    rest = argv[:idx] + argv[idx + 2 :]
    if not rest:
        return tokens
    return rest[:1] + tokens + rest[1:]


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        argv = _expand_config(argv)
        parser = build_parser()
        args = parser.parse_args(argv)
        return args.func(args)
    except (
        ParseError,
        ValueError,
        SingularMatrixError,
        NeumannDivergenceError,
        OSError,
    ) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
