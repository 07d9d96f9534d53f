"""
Command-line front end: synth, fit, predict, eval, cv and protocol.

Settings from the environment are overridden by a --config JSON file,
which is in turn overridden by explicit flags.
"""
import argparse
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional

import pandas as pd
from pydantic import ValidationError

from app.cli.cli_validator import RunConfigFile, load_run_config
from app.core.config import settings
from app.core.errors import ConfigError, SMGBError
from app.core.logging_utils import get_logger
from app.evaluation.evaluation_access import (
    format_report,
    read_scores_csv,
    write_per_seed_csv,
    write_report,
    write_roc_csv,
)
from app.evaluation.evaluation_validator import SeedMetrics
from app.netdata.netdata_access import (
    FLOAT_FORMAT,
    read_adjacency_csv,
    read_edge_list,
    read_pairs_csv,
    read_truth_csv,
    write_adjacency_csv,
    write_truth_csv,
)
from app.netdata.netdata_service import holdout_split, synth_cliques
from app.netdata.netdata_validator import ObservedNetwork
from app.services.evaluation import (
    aggregate,
    auc,
    membership_error,
    roc_points,
    unaligned_membership_error,
)
from app.services.protocol import run_synthetic_protocol
from app.services.trainer import cross_validate_gamma, fit, score_pairs
from app.trainer.trainer_access import load_model, save_model
from app.trainer.trainer_validator import FitConfig

logger = get_logger(__name__)

# flag dest -> FitConfig field
_FIT_FLAGS = {
    "d": "d",
    "gamma": "gamma",
    "gamma_grid": "gamma_grid",
    "l1_strength": "l1_strength",
    "sigma_beta_sq": "sigma_beta_sq",
    "jitter": "jitter",
    "rank": "rank_m",
    "seed": "seed",
    "nonnegative": "nonnegative",
    "include_diagonal": "include_diagonal",
    "init": "init_mode",
    "spectral_method": "spectral_method",
    "max_outer": "max_outer",
    "tol_outer": "tol_outer",
}


# --------------------------------------------------
# Shared helpers
# --------------------------------------------------
def _fit_overrides(args: argparse.Namespace) -> Dict[str, Any]:
    return {
        field: getattr(args, dest)
        for dest, field in _FIT_FLAGS.items()
        if getattr(args, dest, None) is not None
    }


def _pick(flag_value, file_value, default):
    if flag_value is not None:
        return flag_value
    if file_value is not None:
        return file_value
    return default


def _out_dir(args: argparse.Namespace, run: RunConfigFile) -> Path:
    out = Path(_pick(args.out, run.out, settings.output_dir))
    out.mkdir(parents=True, exist_ok=True)
    return out


def _load_network(
    args: argparse.Namespace, run: RunConfigFile, config: FitConfig
) -> ObservedNetwork:
    """
    A .csv input is a dense 0/1 matrix whose every entry is data (directed,
    self-pairs included). Anything else is an edge list and needs --n.
    """
    path = _pick(args.input, run.input, None)
    if path is None:
        raise ConfigError("no input network given (--input or \"input\" in the config file)")

    if Path(path).suffix.lower() == ".csv":
        return read_adjacency_csv(Path(path))

    n = _pick(args.n, run.n, None)
    if n is None:
        raise ConfigError("edge-list input needs the node count (--n)")
    return read_edge_list(
        Path(path),
        n,
        directed=args.directed or run.directed,
        include_diagonal=config.include_diagonal,
    )


def _prepare_fit(args: argparse.Namespace):
    run = load_run_config(args.config)
    config = run.fit_config(_fit_overrides(args))
    net = _load_network(args, run, config)
    config = config.model_copy(update={"include_diagonal": net.include_diagonal})
    train_fraction = _pick(args.train_fraction, None, run.train_fraction)
    train, test = holdout_split(net, train_fraction, config.seed)
    return run, config, net, train, test


def _emit(report_text: str, out: Path) -> None:
    print(report_text, end="")
    (out / "report.txt").write_text(report_text)


# --------------------------------------------------
# Subcommands
# --------------------------------------------------
def cmd_synth(args: argparse.Namespace) -> None:
    run = load_run_config(args.config)
    net, truth = synth_cliques(
        _pick(args.num_cliques, None, run.num_cliques),
        _pick(args.clique_size, None, run.clique_size),
        _pick(args.flip_rate, None, run.flip_rate),
        _pick(args.seed, None, run.seed),
    )
    out = _out_dir(args, run)
    write_adjacency_csv(net, out / "network.csv")
    write_truth_csv(truth, out / "truth.csv")
    logger.info(f"Wrote {net.n}x{net.n} clique network and memberships to {out}")


def cmd_fit(args: argparse.Namespace) -> None:
    run, config, net, train, test = _prepare_fit(args)
    model = fit(net, train, None, config)
    save_model(model, net, train, test, _out_dir(args, run))


def cmd_cv(args: argparse.Namespace) -> None:
    run, config, net, train, test = _prepare_fit(args)
    result = cross_validate_gamma(net, train, None, config)
    out = _out_dir(args, run)
    save_model(result.model, net, train, test, out)

    table = pd.DataFrame([row.model_dump() for row in result.table])
    table.to_csv(out / "cv_table.csv", index=False, float_format=FLOAT_FORMAT)
    for failure in result.failures:
        logger.warning(f"Skipped grid point: {failure}")
    print(f"best_gamma = {result.best_gamma!r}")


def cmd_predict(args: argparse.Namespace) -> None:
    model, net, _, test = load_model(Path(args.model))
    pairs = test
    if args.pairs:
        pairs = read_pairs_csv(Path(args.pairs), net.n, mirrored=not net.directed)

    scores, probs = score_pairs(model, None, pairs.pairs)
    df = pd.DataFrame(
        {
            "i": pairs.pairs[:, 0],
            "j": pairs.pairs[:, 1],
            "score": scores,
            "probability": probs,
            "label": net.adjacency[pairs.pairs[:, 0], pairs.pairs[:, 1]],
        }
    )
    target = Path(args.out) if args.out else Path(args.model) / "predictions.csv"
    target.parent.mkdir(parents=True, exist_ok=True)
    df.to_csv(target, index=False, float_format=FLOAT_FORMAT)
    logger.info(f"Scored {len(df)} pairs into {target}")


def cmd_eval(args: argparse.Namespace) -> None:
    run = load_run_config(args.config)
    seed = _pick(args.seed, None, run.seed)
    aligned = unaligned = None

    if args.scores:
        scores, labels = read_scores_csv(Path(args.scores))
    elif args.model:
        model, net, _, test = load_model(Path(args.model))
        scores, _ = score_pairs(model, None, test.pairs)
        labels = net.adjacency[test.pairs[:, 0], test.pairs[:, 1]]
        truth_path = _pick(args.truth, run.truth, None)
        if truth_path:
            truth = read_truth_csv(Path(truth_path), d=model.U.d)
            aligned = membership_error(model.U.values, truth)
            unaligned = unaligned_membership_error(model.U.values, truth)
    else:
        raise ConfigError("eval needs --scores or --model")

    row = SeedMetrics(
        seed=seed,
        auc=auc(scores, labels),
        membership_distance=aligned,
        unaligned_distance=unaligned,
    )
    out = _out_dir(args, run)
    if args.emit_plot_data:
        write_roc_csv(roc_points(scores, labels), out / "roc.csv")
    _emit(format_report(aggregate([row])), out)


def cmd_protocol(args: argparse.Namespace) -> None:
    run = load_run_config(args.config)
    config = run.fit_config(_fit_overrides(args))
    seeds = list(range(config.seed, config.seed + args.seeds))

    report = run_synthetic_protocol(
        seeds,
        config,
        num_cliques=_pick(args.num_cliques, None, run.num_cliques),
        clique_size=_pick(args.clique_size, None, run.clique_size),
        flip_rate=_pick(args.flip_rate, None, run.flip_rate),
        train_fraction=_pick(args.train_fraction, None, run.train_fraction),
        baseline_rank=args.baseline_rank,
    )
    out = _out_dir(args, run)
    write_per_seed_csv(report, out / "per_seed.csv")
    write_report(report, out / "report.txt")
    print(format_report(report), end="")


# --------------------------------------------------
# Parser
# --------------------------------------------------
def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON run configuration")
    p.add_argument("--out", help=f"output directory (default: {settings.output_dir})")
    p.add_argument("--seed", type=int)


def _add_fit_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--d", type=int, help="latent dimension")
    p.add_argument("--gamma", type=float, help="RBF bandwidth")
    p.add_argument("--gamma-grid", type=float, nargs="+", dest="gamma_grid")
    p.add_argument("--lambda", type=float, dest="l1_strength", help="L1 strength")
    p.add_argument("--sigma-beta-sq", type=float, dest="sigma_beta_sq")
    p.add_argument("--jitter", type=float)
    p.add_argument("--rank", type=int, help="keep the top-m eigenpairs only")
    p.add_argument("--nonnegative", action="store_true", default=None)
    p.add_argument("--include-diagonal", action="store_true", default=None, dest="include_diagonal")
    p.add_argument("--init", choices=["gaussian", "spectral"])
    p.add_argument("--spectral-method", choices=["dense", "lanczos"], dest="spectral_method")
    p.add_argument("--max-outer", type=int, dest="max_outer")
    p.add_argument("--tol-outer", type=float, dest="tol_outer")
    p.add_argument("--train-fraction", type=float, dest="train_fraction")


def _add_input(p: argparse.ArgumentParser) -> None:
    p.add_argument("--input", help="adjacency .csv or edge-list file")
    p.add_argument("--n", type=int, help="node count for edge-list input")
    p.add_argument("--directed", action="store_true")


def _add_synth_shape(p: argparse.ArgumentParser) -> None:
    p.add_argument("--num-cliques", type=int, dest="num_cliques")
    p.add_argument("--clique-size", type=int, dest="clique_size")
    p.add_argument("--flip-rate", type=float, dest="flip_rate")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="smgb", description="Sparse matrix-variate GP blockmodel"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a noisy clique network")
    _add_common(p)
    _add_synth_shape(p)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("fit", help="fit the model on a hold-out split")
    _add_common(p)
    _add_input(p)
    _add_fit_flags(p)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("cv", help="select gamma on an inner split, then refit")
    _add_common(p)
    _add_input(p)
    _add_fit_flags(p)
    p.set_defaults(func=cmd_cv)

    p = sub.add_parser("predict", help="score pairs with a saved model")
    p.add_argument("--model", required=True, help="model directory written by fit")
    p.add_argument("--pairs", help="CSV with columns i,j (default: stored test pairs)")
    p.add_argument("--out", help="output CSV (default: <model>/predictions.csv)")
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("eval", help="AUC and membership distance")
    _add_common(p)
    p.add_argument("--scores", help="CSV with columns score,label")
    p.add_argument("--model", help="model directory; scores its stored test pairs")
    p.add_argument("--truth", help="ground-truth membership CSV (node,group)")
    p.add_argument("--emit-plot-data", action="store_true", dest="emit_plot_data")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("protocol", help="multi-seed synthetic clique protocol")
    _add_common(p)
    _add_synth_shape(p)
    _add_fit_flags(p)
    p.add_argument("--seeds", type=int, default=10, help="number of consecutive seeds")
    p.add_argument("--baseline-rank", type=int, default=3, dest="baseline_rank")
    p.set_defaults(func=cmd_protocol)

    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except (SMGBError, ValidationError, OSError) as e:
        logger.error(f"{args.command} failed: {e}")
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
