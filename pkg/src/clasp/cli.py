"""Command line interface.

Exit codes: 0 success, 1 runtime or input error, 2 usage error. The number
of worker threads for ensembles is read from ``CLASP_NUM_THREADS``
(default: all available cores); results do not depend on it.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
import time
import warnings
from pathlib import Path

from . import __version__
from .ensemble import EnsembleConfig, calc_clasp_ensemble
from .errors import InvalidParameterError, ParseError
from .io import ANNOTATED, FORMATS, PLAIN, load_series, write_atomic
from .metrics import covering_score, f1_score
from .profile import SCORERS
from .segmentation import segment
from .suss import SussConfig, calc_suss
from .validation import ValidationConfig

logger = logging.getLogger("clasp")


def _fmt_float(x: float, sci: bool = False) -> str:
    if not math.isfinite(x):
        return "null"
    return f"{x:.6e}" if sci else f"{x:.6f}"


def _dump(obj, sci_keys=frozenset(), key=None, indent=0) -> str:
    """JSON with floats in fixed 6-decimal form (keys in ``sci_keys`` use %e)."""
    pad = "  " * (indent + 1)
    end = "  " * indent
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(k)}: {_dump(v, sci_keys, k, indent + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        return "[" + ", ".join(_dump(v, sci_keys, key, indent) for v in obj) + "]"
    if isinstance(obj, float):
        return _fmt_float(obj, key in sci_keys)
    return json.dumps(obj)


def _load(args):
    return load_series(args.input, args.format)


def _window(args, values):
    if args.window is not None:
        return args.window, "fixed"
    return calc_suss(values, SussConfig(threshold=args.threshold)), "auto"


def _emit(text: str, path) -> None:
    if path is None:
        sys.stdout.write(text)
    else:
        write_atomic(path, text)


def _profile_text(scores) -> str:
    return "".join(f"{i} {s:.6f}\n" for i, s in enumerate(scores))


def cmd_segment(args) -> int:
    record = _load(args)
    started = time.perf_counter()
    w, source = _window(args, record.values)
    ens = EnsembleConfig(n_iter=args.n_iter, seed=args.seed, k=args.k, scorer=args.score)
    result = segment(
        record.values, window=w, n_segments=args.n_cps,
        ensemble=ens, validation=ValidationConfig(args.p_value),
    )
    elapsed_ms = (time.perf_counter() - started) * 1000.0
    doc = {
        "name": record.name,
        "length": int(record.values.size),
        "window_size": int(result.window_size),
        "window_source": source,
        "mode": result.mode,
        "n_segments": result.n_segments,
        "score": args.score,
        "k": args.k,
        "n_iter": args.n_iter,
        "seed": args.seed,
        "p_value_threshold": float(args.p_value),
        "change_points": [int(c) for c in result.change_points],
        "scores": [float(s) for s in result.scores],
        "p_values": [float(p) for p in result.p_values],
    }
    if args.timing:
        doc["elapsed_ms"] = round(elapsed_ms, 3)
    logger.info("segmentation took %.1f ms", elapsed_ms)
    text = _dump(doc, sci_keys={"p_values", "p_value_threshold"}) + "\n"
    # validate-then-write: nothing is written unless everything succeeded
    if args.emit_profile is not None:
        write_atomic(args.emit_profile, _profile_text(result.profile.scores))
    _emit(text, args.output)
    return 0


def cmd_profile(args) -> int:
    record = _load(args)
    w, _ = _window(args, record.values)
    ens = EnsembleConfig(n_iter=args.n_iter, seed=args.seed, k=args.k, scorer=args.score)
    prof = calc_clasp_ensemble(record.values, w, ens)
    _emit(_profile_text(prof.scores), args.output)
    return 0


def cmd_window_size(args) -> int:
    record = _load(args)
    w = calc_suss(record.values, SussConfig(threshold=args.threshold))
    sys.stdout.write(f"{w}\n")
    return 0


def _parse_cps(text: str, fmt: str):
    """Comma separated integers, or a path to an annotated file."""
    path = Path(text)
    if text and path.is_file():
        record = load_series(path, fmt)
        return list(record.change_points or ()), int(record.values.size)
    text = text.strip()
    if not text:
        return [], None
    try:
        return [int(tok) for tok in text.split(",") if tok.strip()], None
    except ValueError:
        raise InvalidParameterError(f"cannot parse change points {text!r}") from None


def cmd_evaluate(args) -> int:
    truth, n_truth = _parse_cps(args.truth, ANNOTATED)
    pred, n_pred = _parse_cps(args.pred, ANNOTATED)
    n = args.length or n_truth or n_pred
    if n is None:
        raise InvalidParameterError("--length is required unless an annotated file is given")
    lines = []
    if args.metric in ("covering", "both"):
        lines.append(f"covering {covering_score(truth, pred, n):.6f}")
    if args.metric in ("f1", "both"):
        lines.append(f"f1 {f1_score(truth, pred, n, args.margin):.6f}")
    sys.stdout.write("\n".join(lines) + "\n")
    return 0


def _positive_int(text):
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {v}")
    return v


def _nonneg_int(text):
    v = int(text)
    if v < 0:
        raise argparse.ArgumentTypeError(f"must be >= 0, got {v}")
    return v


def _input_args(p):
    p.add_argument("--input", required=True, help="series file")
    p.add_argument("--format", choices=FORMATS, default=PLAIN)


def _window_args(p):
    g = p.add_mutually_exclusive_group()
    g.add_argument("--window", type=_positive_int, help="fixed window size")
    g.add_argument("--auto-window", action="store_true", help="learn the window size (default)")
    p.add_argument("--threshold", type=float, default=0.89, help="window search threshold")


def _ensemble_args(p):
    p.add_argument("--n-iter", type=_nonneg_int, default=30)
    p.add_argument("--seed", type=int, default=2357)
    p.add_argument("--k", type=_positive_int, default=3, help="neighbours (odd)")
    p.add_argument("--score", choices=SCORERS, default="roc_auc")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="clasp", description="Parameter-free time series segmentation.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("segment", help="find change points")
    _input_args(p)
    _window_args(p)
    _ensemble_args(p)
    p.add_argument("--n-cps", "--n-segments", dest="n_cps", type=_positive_int,
                   help="number of segments C; at most C-1 change points, no validation")
    p.add_argument("--p-value", type=float, default=1e-15)
    p.add_argument("--output", help="write the result document here instead of stdout")
    p.add_argument("--emit-profile", help="write the top-level profile as 'offset score' lines")
    p.add_argument("--timing", action="store_true", help="include elapsed_ms in the document")
    p.set_defaults(func=cmd_segment)

    p = sub.add_parser("profile", help="print the score profile")
    _input_args(p)
    _window_args(p)
    _ensemble_args(p)
    p.add_argument("--output")
    p.set_defaults(func=cmd_profile)

    p = sub.add_parser("window-size", help="print the learned window size")
    _input_args(p)
    p.add_argument("--threshold", type=float, default=0.89)
    p.set_defaults(func=cmd_window_size)

    p = sub.add_parser("evaluate", help="compare change point sets")
    p.add_argument("--truth", required=True, help="comma separated offsets or annotated file")
    p.add_argument("--pred", required=True, help="comma separated offsets or annotated file")
    p.add_argument("--length", type=_positive_int)
    p.add_argument("--metric", choices=("covering", "f1", "both"), default="both")
    p.add_argument("--margin", type=float, default=0.01, help="F1 margin as a fraction of the length")
    p.set_defaults(func=cmd_evaluate)
    return parser


def _show_warning(message, category, filename, lineno, file=None, line=None):
    print(f"warning: {message}", file=sys.stderr)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s: %(message)s",
        stream=sys.stderr,
    )
    with warnings.catch_warnings():
        warnings.simplefilter("always")
        warnings.showwarning = _show_warning
        try:
            return args.func(args)
        except (ParseError, InvalidParameterError) as exc:
            print(f"error: {exc}", file=sys.stderr)
            return 1
        except OSError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return 1


if __name__ == "__main__":
    sys.exit(main())
