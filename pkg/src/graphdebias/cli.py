"""Command-line entry point: synth, measure, debias, eval, spectral.

Exit codes: 0 success, 1 domain error (invalid values, degenerate inputs),
2 IO/parse error. All reports are JSON with sorted keys so identical runs
produce identical files (timings excluded). Every random choice flows from
an explicit --seed flag.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time


def _jsonable(obj):
    import numpy as np

    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, float) and obj != obj:   # NaN -> null
        return None
    return obj


def _dump(report: dict, path=None) -> None:
    text = json.dumps(_jsonable(report), indent=2, sort_keys=True)
    if path:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def _add_operator_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--alpha", type=float, default=0.5)
    parser.add_argument("--horizon", type=int, default=2)
    parser.add_argument("--betas", type=str, default=None,
                        help="comma-separated hop weights, e.g. '0.667,0.333'")


def _betas(args):
    if args.betas is None:
        from .graph import geometric_betas

        return geometric_betas(args.horizon)
    return tuple(float(b) for b in args.betas.split(","))


def _load_net(args):
    from .graph import include_sensitive_feature, load_network

    net = load_network(args.network)
    if getattr(args, "include_sensitive_as_feature", False):
        net = include_sensitive_feature(net)
    return net


def cmd_synth(args) -> int:
    from .graph import save_network
    from .synth import (SynthConfig, attach_labels_and_padding,
                        gen_case_biased_attributes, gen_case_biased_structure,
                        gen_ternary)

    cfg = SynthConfig(n_nodes=args.n, seed=args.seed, t=args.t,
                      noise_sigma=args.noise_sigma, extra_dims=args.extra_dims)
    if args.kind == "case1":
        net = gen_case_biased_attributes(cfg)
        if not args.no_labels:
            net = attach_labels_and_padding(net, cfg)
    elif args.kind == "case2":
        net = gen_case_biased_structure(cfg)
        if not args.no_labels:
            net = attach_labels_and_padding(net, cfg)
    else:
        net = gen_ternary(cfg)
    save_network(net, args.out)
    manifest = {"kind": args.kind, "labeled": not args.no_labels,
                "config": {"n_nodes": cfg.n_nodes, "seed": cfg.seed, "t": cfg.t,
                           "noise_sigma": cfg.noise_sigma, "extra_dims": cfg.extra_dims}}
    _dump(manifest, args.out + ".manifest.json")
    return 0


def cmd_measure(args) -> int:
    from .metrics import measure_bias

    net = _load_net(args)
    report = measure_bias(net.adjacency, net.attributes, net.sensitive,
                          alpha=args.alpha, horizon=args.horizon, betas=_betas(args),
                          normalize=not args.assume_normalized)
    _dump(report.to_dict(), args.out)
    return 0


def cmd_debias(args) -> int:
    import numpy as np

    from .debias import DebiasConfig, debias_network
    from .graph import save_network

    net = _load_net(args)
    base = {}
    if args.config:
        with open(args.config, encoding="utf-8") as fh:
            base = json.load(fh)
    overrides = {
        "epochs": args.epochs, "mu1": args.mu1, "mu2": args.mu2,
        "mu3": args.mu3, "mu4": args.mu4, "clip_c": args.clip_c,
        "mask_z": args.mask_z, "binarize_r": args.binarize_r,
        "alpha": args.alpha, "horizon": args.horizon, "seed": args.seed,
    }
    if args.betas is not None:
        overrides["betas"] = list(_betas(args))
    base.update({k: v for k, v in overrides.items() if v is not None})
    cfg = DebiasConfig.from_dict(base)

    os.makedirs(args.out, exist_ok=True)
    t0 = time.perf_counter()
    debiased, result, report = debias_network(net, cfg)
    elapsed = time.perf_counter() - t0

    save_network(debiased, os.path.join(args.out, "debiased_network.json"))
    np.save(os.path.join(args.out, "adjacency_continuous.npy"), result.adj_continuous)
    run_report = {
        "command": "debias",
        "config_echo": cfg.to_dict(),
        "input": os.path.basename(args.network),
        **report,
        "timings": {"debias_seconds": elapsed},
    }
    _dump(run_report, os.path.join(args.out, "run_report.json"))
    return 0


def cmd_eval(args) -> int:
    import numpy as np

    from .gnn import GcnHyper, fairness_evaluation, gcn_forward, init_gcn, make_splits, train_gcn

    net = _load_net(args)
    hyper = GcnHyper(epochs=args.gcn_epochs, seed=args.seed)
    t0 = time.perf_counter()
    report = fairness_evaluation(net, seed=args.seed, hyper=hyper,
                                 normalize=not args.assume_normalized)
    elapsed = time.perf_counter() - t0
    out = {"command": "eval", **report.to_dict(),
           "timings": {"eval_seconds": elapsed}}
    _dump(out, args.out)

    if args.dump_predictions:
        from .graph import minmax_normalize, AttributedNetwork

        work = net
        if not args.assume_normalized:
            work = AttributedNetwork(net.adjacency, minmax_normalize(net.attributes),
                                     net.sensitive, net.labels, net.splits)
        splits = work.splits or make_splits(work.labels, seed=args.seed)
        model, _ = train_gcn(work, splits, hyper)
        probs = gcn_forward(model, work)
        with open(args.dump_predictions, "w", encoding="utf-8") as fh:
            fh.write("node_id,score,label,sensitive\n")
            for i in range(work.n_nodes):
                fh.write(f"{i},{probs[i, 1]:.6f},{work.labels[i]},{work.sensitive[i]}\n")
    return 0


def cmd_spectral(args) -> int:
    from .graph import degree_normalize, normalized_laplacian, propagation_operator
    from .metrics import frequency_response

    import numpy as np

    net = _load_net(args)
    if net.n_nodes > 2000:
        raise ValueError("spectral analysis capped at 2000 nodes")
    lap = normalized_laplacian(net.adjacency)
    lambda_max = float(np.linalg.eigvalsh(lap)[-1])
    if lambda_max <= 0:
        raise ValueError("graph has no edges")
    alpha = args.alpha if args.alpha is not None else 1.0 / lambda_max
    if abs(alpha - 1.0 / lambda_max) > 1e-9:
        print(f"warning: alpha={alpha:g} differs from 1/lambda_max={1.0 / lambda_max:g}; "
              "reconstruction residual will not vanish", file=sys.stderr)
    op = propagation_operator(degree_normalize(net.adjacency), alpha,
                              args.horizon, _betas(args))
    response = frequency_response(net.adjacency, op)
    _dump({"command": "spectral", "alpha": alpha, **response.to_dict()}, args.out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="graphdebias",
                                     description="Measure and mitigate bias in attributed networks")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a synthetic benchmark network")
    p.add_argument("kind", choices=["case1", "case2", "ternary"])
    p.add_argument("--n", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--t", type=int, default=250)
    p.add_argument("--noise-sigma", type=float, default=0.5)
    p.add_argument("--extra-dims", type=int, default=8)
    p.add_argument("--no-labels", action="store_true")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("measure", help="attribute and structural bias of a network")
    p.add_argument("network")
    _add_operator_flags(p)
    p.add_argument("--assume-normalized", action="store_true",
                   help="attributes already lie on the normalized scale")
    p.add_argument("--include-sensitive-as-feature", action="store_true")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_measure)

    p = sub.add_parser("debias", help="run the alternating debiasing optimizer")
    p.add_argument("network")
    p.add_argument("--config", default=None, help="JSON file with DebiasConfig fields")
    p.add_argument("--epochs", type=int, default=None)
    p.add_argument("--mu1", type=float, default=None)
    p.add_argument("--mu2", type=float, default=None)
    p.add_argument("--mu3", type=float, default=None)
    p.add_argument("--mu4", type=float, default=None)
    p.add_argument("--clip-c", type=float, default=None)
    p.add_argument("--mask-z", type=int, default=None)
    p.add_argument("--binarize-r", type=float, default=None)
    p.add_argument("--alpha", type=float, default=None)
    p.add_argument("--horizon", type=int, default=None)
    p.add_argument("--betas", type=str, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--include-sensitive-as-feature", action="store_true")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_debias)

    p = sub.add_parser("eval", help="train the built-in GCN and report fairness")
    p.add_argument("network")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--gcn-epochs", type=int, default=1000)
    p.add_argument("--assume-normalized", action="store_true")
    p.add_argument("--include-sensitive-as-feature", action="store_true")
    p.add_argument("--dump-predictions", default=None,
                   help="CSV path for per-node scores")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("spectral", help="frequency response of the propagation matrix")
    p.add_argument("network")
    p.add_argument("--alpha", type=float, default=None,
                   help="defaults to 1/lambda_max of the normalized Laplacian")
    p.add_argument("--horizon", type=int, default=2)
    p.add_argument("--betas", type=str, default=None)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_spectral)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        from .graph import GraphFormatError

        if isinstance(exc, GraphFormatError):
            print(f"error: {exc}", file=sys.stderr)
            return 2
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
