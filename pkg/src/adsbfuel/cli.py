"""Command-line interface.

Every subcommand reads its inputs, does its work in memory and only then
writes outputs (temporary file plus rename), so a failing run never leaves a
partial file behind.  Errors go to standard error as ``code=<Name> message``;
the exit status is 1 for bad input and 2 for internal failures.
"""

from __future__ import annotations

import argparse
import io
import json
import os
import pathlib
import sys
import zlib
from typing import Sequence

import numpy as np

from . import __version__
from .emissions import GridSpec, export_text, grid_flight, merge
from .errors import FuelError
from .fuelnet import (
    OPTIMIZERS,
    ModelConfig,
    atomic_write_text,
    load_model,
    predict_interval,
    predict_samples,
    save_model,
    train,
)
from .metrics import convergence_slope, duration_buckets, grouped_mape, mape
from .monotone import eval_curve, eval_flow, instantaneous_from_model
from .spectral import SpectralFeature, featurize
from .synth import SynthConfig, TrainingSample, make_dataset, random_flight
from .trajectory import AircraftMeta, CleaningConfig, clean_track, load_track, write_track


class UsageError(FuelError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{message}\n{self.format_usage().rstrip()}")


def stream_seed(seed: int, name: str) -> int:
    """Seed of the named sub-stream (``init``, ``shuffle``, ``synth``, ...)."""
    return int(np.random.SeedSequence([seed, zlib.crc32(name.encode())]).generate_state(1, np.uint64)[0] >> 1)


def _ints(text: str) -> list[int]:
    try:
        vals = [int(x) for x in str(text).split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None
    if not vals or any(v <= 0 for v in vals):
        raise argparse.ArgumentTypeError("values must be positive")
    return vals


def _emit(text: str, out: str | None) -> None:
    if out in (None, "-"):
        sys.stdout.write(text)
    else:
        atomic_write_text(out, text)


def _track_paths(inputs: Sequence[str]) -> list[pathlib.Path]:
    paths: list[pathlib.Path] = []
    for item in inputs:
        p = pathlib.Path(item)
        if p.is_dir():
            paths += sorted(q for q in p.iterdir() if q.suffix in (".csv", ".jsonl"))
        elif p.exists():
            paths.append(p)
        else:
            raise FileNotFoundError(f"no such track file or directory: {item}")
    if not paths:
        raise UsageError("no track files found")
    return paths


def _cli_meta(args) -> AircraftMeta | None:
    if args.type is None:
        return None
    return AircraftMeta(args.type, args.age, args.wingspan)


def _read_track(path, args):
    track = load_track(path, meta=_cli_meta(args))
    if getattr(args, "no_clean", False):
        return track
    cleaned, _ = clean_track(track, CleaningConfig())
    return cleaned


def _read_dataset(path) -> list[TrainingSample]:
    samples = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                samples.append(TrainingSample.from_dict(json.loads(line)))
            except (KeyError, TypeError, ValueError) as exc:
                raise UsageError(f"{path}:{lineno}: bad dataset record ({exc})") from None
    if not samples:
        raise UsageError(f"{path}: empty dataset")
    return samples


def _synth_config(args) -> SynthConfig:
    if args.synth_config is None:
        return SynthConfig()
    with open(args.synth_config, encoding="utf-8") as fh:
        return SynthConfig.from_dict(json.load(fh))


def _jsonl(records) -> str:
    return "".join(json.dumps(r, separators=(",", ":")) + "\n" for r in records)


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def cmd_synth(args) -> None:
    cfg = _synth_config(args)
    seed = stream_seed(args.seed, "synth")
    if args.tracks:
        if not args.out_dir:
            raise UsageError("--tracks needs --out-dir")
        files = {}
        for i in range(args.tracks):
            flight, _ = random_flight(cfg, seed, i)
            buf = io.StringIO()
            write_track(flight.track, buf, args.format)
            stem = f"flight_{i:05d}"
            files[f"{stem}.{args.format}"] = buf.getvalue()
            if args.format == "csv":
                side = flight.meta.to_dict()
                side["profile"] = flight.profile.to_dict()
                files[f"{stem}.json"] = json.dumps(side) + "\n"
        os.makedirs(args.out_dir, exist_ok=True)
        for name, text in files.items():
            atomic_write_text(os.path.join(args.out_dir, name), text)
    if args.samples:
        ds = make_dataset(args.samples, cfg, seed, args.n_h, args.n_v, threads=args.threads)
        _emit(_jsonl(s.to_dict() for s in ds), args.dataset)
    if not args.tracks and not args.samples:
        raise UsageError("nothing to do: pass --tracks and/or --samples")


def cmd_featurize(args) -> None:
    records = []
    for path in _track_paths(args.inputs):
        track = _read_track(path, args)
        feat = featurize(track, args.n_h, args.n_v, args.t_m)
        rec = {"flight_id": track.flight_id}
        rec.update(feat.to_dict())
        rec["meta"] = track.meta.to_dict() if track.meta is not None else None
        records.append(rec)
    _emit(_jsonl(records), args.out)


def _model_config(args, samples) -> ModelConfig:
    t_ms = {s.feature.T_M for s in samples}
    if len(t_ms) != 1:
        raise UsageError(f"dataset mixes T_M values {sorted(t_ms)}")
    radii = {s.feature.radii for s in samples}
    if len(radii) != 1:
        raise UsageError(f"dataset mixes truncation radii {sorted(radii)}")
    (n_h, n_v) = radii.pop()
    return ModelConfig(
        N_h=n_h,
        N_v=n_v,
        hidden_sizes=tuple(args.hidden),
        learning_rate=args.lr,
        batch_size=args.batch_size,
        epochs=args.epochs,
        seed=stream_seed(args.seed, "model"),
        T_M=t_ms.pop(),
        lr_schedule=args.schedule,
        optimizer=args.optimizer,
    )


def cmd_train(args) -> None:
    samples = _read_dataset(args.dataset)
    config = _model_config(args, samples)
    model, history = train(samples, config, threads=args.threads)
    buf = io.StringIO()
    save_model(model, buf)
    atomic_write_text(args.out, buf.getvalue())
    print(f"final_loss={history.loss[-1]!r} epochs={len(history.loss)} saturated={history.saturated}")
    if args.plot:
        from .plotting import plot_history

        plot_history(history.loss, history.lr, args.plot)


def cmd_predict(args) -> None:
    model = load_model(args.model)
    track = _read_track(args.track, args)
    t0 = float(track.t[0])
    start = 0.0 if args.start is None else args.start
    end = track.duration if args.end is None else args.end
    print(repr(predict_interval(model, track, t0 + start, t0 + end)))


def cmd_curve(args) -> None:
    model = load_model(args.model)
    track = _read_track(args.track, args)
    if not args.spacing > 0:
        raise UsageError("--spacing must be positive")
    inst = instantaneous_from_model(model, track, step=args.step)
    grid = np.arange(0.0, track.duration, args.spacing)
    grid = np.r_[grid, track.duration] if track.duration - grid[-1] > 0 else grid
    Q = eval_curve(inst.curve, grid)
    q = eval_flow(inst.curve, grid)
    lines = ["T,Q,q"] + [f"{a!r},{b!r},{c!r}" for a, b, c in zip(grid.tolist(), Q.tolist(), q.tolist())]
    _emit("\n".join(lines) + "\n", args.out)
    if inst.repaired:
        print(f"repaired={inst.repaired}", file=sys.stderr)
    if args.plot:
        from .plotting import plot_curve

        plot_curve(grid, Q, q, args.plot, alt_t=track.t - track.t[0], alt=track.alt, title=track.flight_id)


def cmd_eval(args) -> None:
    model = load_model(args.model)
    samples = _read_dataset(args.dataset)
    pred = predict_samples(model, samples)
    truth = np.array([s.q_true for s in samples])
    rows = [("all", r) for r in grouped_mape(pred, truth, ["all"] * len(samples))]
    by_type = grouped_mape(pred, truth, [s.meta.aircraft_type for s in samples])
    by_type.sort(key=lambda r: r.group)
    rows += [("type", r) for r in by_type]
    durations = [s.feature.t0 for s in samples]
    by_dur = grouped_mape(pred, truth, duration_buckets(durations))
    lower = {r.group: float(r.group.split("-")[0].lstrip("<>=").rstrip("s")) for r in by_dur}
    by_dur.sort(key=lambda r: (not r.group.startswith("<"), lower[r.group]))
    rows += [("duration", r) for r in by_dur]
    if args.format == "csv":
        text = "group_kind,group,n,mape,rel_l2\n" + "".join(
            f"{k},{r.group},{r.n},{r.mape!r},{r.rel_l2!r}\n" for k, r in rows
        )
    else:
        text = f"{'kind':<9}{'group':<14}{'n':>8}{'MAPE %':>10}{'relL2 %':>10}\n" + "".join(
            f"{k:<9}{r.group:<14}{r.n:>8}{100 * r.mape:>10.3f}{100 * r.rel_l2:>10.3f}\n" for k, r in rows
        )
    _emit(text, args.out)
    if args.plot_prefix:
        from .plotting import plot_groups

        plot_groups([r.group for r in by_type], [r.mape for r in by_type], [r.n for r in by_type],
                    f"{args.plot_prefix}_type.png", "aircraft type")
        plot_groups([r.group for r in by_dur], [r.mape for r in by_dur], [r.n for r in by_dur],
                    f"{args.plot_prefix}_duration.png", "segment duration")


def cmd_grid(args) -> None:
    model = load_model(args.model)
    spec = GridSpec(args.cell_deg, args.layer_m, args.factor)
    grids = []
    for path in _track_paths(args.inputs):
        track = _read_track(path, args)
        inst = instantaneous_from_model(model, track, step=args.step)
        grids.append(grid_flight(track, inst, spec))
    _emit(export_text(merge(grids, spec)), args.out)


def _truncate(samples: list[TrainingSample], N: int) -> list[TrainingSample]:
    # coefficient n does not depend on the truncation radius
    return [
        TrainingSample(
            SpectralFeature(s.feature.alpha[: N + 1], s.feature.beta[: N + 1], s.feature.t0, s.feature.T_M),
            s.meta,
            s.q_true,
            s.flight_id,
        )
        for s in samples
    ]


def convergence_table(sizes, radii, seed: int, test_size: int, model_kwargs: dict, cfg=None, threads: int = 1):
    """MAPE matrix (sizes x radii) and per-radius slopes on synthetic data."""
    cfg = cfg or SynthConfig()
    top = max(radii)
    train_all = make_dataset(max(sizes), cfg, stream_seed(seed, "synth"), top, top, threads=threads)
    test_all = make_dataset(test_size, cfg, stream_seed(seed, "synth-test"), top, top, threads=threads)
    errors = np.empty((len(sizes), len(radii)))
    for k, N in enumerate(radii):
        tr_N, te_N = _truncate(train_all, N), _truncate(test_all, N)
        truth = np.array([s.q_true for s in te_N])
        for i, n in enumerate(sizes):
            config = ModelConfig(N_h=N, N_v=N, T_M=cfg.t_m, seed=stream_seed(seed, "model"), **model_kwargs)
            model, _ = train(tr_N[:n], config, threads=threads)
            errors[i, k] = mape(predict_samples(model, te_N), truth)
    slopes = [convergence_slope(sizes, errors[:, k]) for k in range(len(radii))]
    return errors, slopes


def cmd_convergence(args) -> None:
    sizes, radii = args.sizes, args.radii
    if len(sizes) < 3:
        raise UsageError("--sizes needs at least 3 values for a slope")
    kwargs = dict(
        hidden_sizes=tuple(args.hidden),
        learning_rate=args.lr,
        batch_size=args.batch_size,
        epochs=args.epochs,
        lr_schedule=args.schedule,
        optimizer=args.optimizer,
    )
    errors, slopes = convergence_table(sizes, radii, args.seed, args.test_size, kwargs, _synth_config(args), args.threads)
    head = "size," + ",".join(f"N={N}" for N in radii)
    body = [f"{n}," + ",".join(repr(float(e)) for e in errors[i]) for i, n in enumerate(sizes)]
    tail = "slope," + ",".join(repr(float(s)) for s in slopes)
    _emit("\n".join([head, *body, tail]) + "\n", args.out)
    if args.plot:
        from .plotting import plot_convergence

        plot_convergence(sizes, errors, radii, slopes, args.plot)


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


def _add_meta_flags(p) -> None:
    g = p.add_argument_group("metadata for CSV tracks without a sidecar")
    g.add_argument("--type", help="aircraft type code")
    g.add_argument("--age", type=float, default=0.0, help="aircraft age in years")
    g.add_argument("--wingspan", type=float, default=35.8, help="wingspan in metres")
    p.add_argument("--no-clean", action="store_true", help="skip track cleaning")


def _add_train_flags(p) -> None:
    p.add_argument("--hidden", type=_ints, default=[256, 128, 64], help="hidden layer sizes, e.g. 256,128,64")
    p.add_argument("--lr", type=float, default=ModelConfig.learning_rate)
    p.add_argument("--batch-size", type=int, default=ModelConfig.batch_size)
    p.add_argument("--epochs", type=int, default=ModelConfig.epochs)
    p.add_argument("--schedule", choices=["cosine", "constant"], default=ModelConfig.lr_schedule)
    p.add_argument("--optimizer", choices=list(OPTIMIZERS), default=ModelConfig.optimizer)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="adsbfuel", description="Interval and instantaneous fuel burn from flight tracks.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--seed", type=int, default=0, help="master seed for every random stream")
    parser.add_argument("--config", help="JSON file whose keys mirror the command-line flags")
    parser.add_argument("--threads", type=int, default=1, help="worker count where parallelism is safe")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser, metavar="COMMAND")

    p = sub.add_parser("synth", help="generate synthetic tracks and/or a labelled dataset")
    p.add_argument("--tracks", type=int, default=0, help="number of track files to write")
    p.add_argument("--out-dir", help="directory for track files")
    p.add_argument("--format", choices=["csv", "jsonl"], default="csv")
    p.add_argument("--samples", type=int, default=0, help="number of labelled samples")
    p.add_argument("--dataset", help="dataset JSONL path (default stdout)")
    p.add_argument("--n-h", type=int, default=50)
    p.add_argument("--n-v", type=int, default=50)
    p.add_argument("--synth-config", help="JSON with laws, mixture and profile ranges")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("featurize", help="tracks to spectral feature JSONL")
    p.add_argument("inputs", nargs="+", help="track files or directories")
    p.add_argument("--n-h", type=int, default=50)
    p.add_argument("--n-v", type=int, default=50)
    p.add_argument("--t-m", type=float, default=SynthConfig().t_m, help="normalisation span T_M in seconds")
    p.add_argument("--out")
    _add_meta_flags(p)
    p.set_defaults(func=cmd_featurize)

    p = sub.add_parser("train", help="train a model on a labelled dataset")
    p.add_argument("--dataset", required=True)
    p.add_argument("--out", required=True, help="model file")
    p.add_argument("--plot", help="PNG of the loss history")
    _add_train_flags(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("predict", help="fuel burned over an interval of one track")
    p.add_argument("--model", required=True)
    p.add_argument("--track", required=True)
    p.add_argument("--start", type=float, help="seconds after the first sample (default 0)")
    p.add_argument("--end", type=float, help="seconds after the first sample (default track end)")
    _add_meta_flags(p)
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("curve", help="cumulative fuel and fuel flow along one track")
    p.add_argument("--model", required=True)
    p.add_argument("--track", required=True)
    p.add_argument("--step", type=float, default=200.0, help="knot spacing in seconds")
    p.add_argument("--spacing", type=float, default=1.0, help="output grid spacing in seconds")
    p.add_argument("--out")
    p.add_argument("--plot", help="PNG of fuel, flow and altitude")
    _add_meta_flags(p)
    p.set_defaults(func=cmd_curve)

    p = sub.add_parser("eval", help="error tables for a model on a labelled dataset")
    p.add_argument("--model", required=True)
    p.add_argument("--dataset", required=True)
    p.add_argument("--format", choices=["csv", "text"], default="csv")
    p.add_argument("--out")
    p.add_argument("--plot-prefix", help="write <prefix>_type.png and <prefix>_duration.png")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("grid", help="gridded CO2 inventory for a set of tracks")
    p.add_argument("inputs", nargs="+", help="track files or directories")
    p.add_argument("--model", required=True)
    p.add_argument("--out")
    p.add_argument("--step", type=float, default=200.0)
    p.add_argument("--cell-deg", type=float, default=0.33)
    p.add_argument("--layer-m", type=float, default=1000.0)
    p.add_argument("--factor", type=float, default=3.16, help="kg CO2 per kg fuel")
    _add_meta_flags(p)
    p.set_defaults(func=cmd_grid)

    p = sub.add_parser("convergence", help="MAPE over dataset sizes and truncation radii")
    p.add_argument("--sizes", type=_ints, default=[10000, 20000, 40000, 80000, 160000])
    p.add_argument("--radii", type=_ints, default=[50])
    p.add_argument("--test-size", type=int, default=4000)
    p.add_argument("--out")
    p.add_argument("--plot", help="PNG of the log-log convergence")
    p.add_argument("--synth-config")
    _add_train_flags(p)
    p.set_defaults(func=cmd_convergence)
    return parser


def _apply_config(parser: argparse.ArgumentParser, argv: list[str]) -> argparse.Namespace:
    args = parser.parse_args(argv)
    if not args.config:
        return args
    try:
        with open(args.config, encoding="utf-8") as fh:
            conf = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read config {args.config}: {exc}") from None
    if not isinstance(conf, dict):
        raise UsageError("config must be a JSON object")
    conf = {k.replace("-", "_"): v for k, v in conf.items()}
    unknown = sorted(set(conf) - set(vars(args)))
    if unknown:
        raise UsageError(f"unknown config keys: {', '.join(unknown)}")
    if {"func", "command", "config"} & set(conf):
        raise UsageError("config cannot set func, command or config")
    # defaults come from the file; flags given on the command line still win
    parser.set_defaults(**{k: v for k, v in conf.items() if k in ("seed", "threads")})
    for sp in parser._subparsers._group_actions[0].choices.values():  # noqa: SLF001
        sp.set_defaults(**{k: v for k, v in conf.items() if k not in ("seed", "threads")})
    merged = parser.parse_args(argv)
    for k in ("hidden", "sizes", "radii"):
        v = getattr(merged, k, None)
        if isinstance(v, str):
            setattr(merged, k, _ints(v))
    return merged


def _validate(args) -> None:
    if args.threads < 1:
        raise UsageError("--threads must be at least 1")
    for name in ("epochs", "batch_size", "test_size", "n_h", "n_v"):
        v = getattr(args, name, None)
        if v is not None and v < 0:
            raise UsageError(f"--{name.replace('_', '-')} must be non-negative")


def run(argv: Sequence[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = _apply_config(parser, argv)
        if args.command is None:
            raise UsageError(f"missing subcommand\n{parser.format_usage().rstrip()}")
        _validate(args)
        args.func(args)
        return 0
    except FuelError as exc:
        print(f"code={exc.code} {exc}", file=sys.stderr)
        return 1 if exc.input_error else 2
    except (OSError, ValueError, KeyError, json.JSONDecodeError, argparse.ArgumentTypeError) as exc:
        print(f"code={type(exc).__name__} {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # noqa: BLE001
        print(f"code=InternalError {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
