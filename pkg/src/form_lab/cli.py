"""Command-line interface: gen-data / train / sample / eval / plot.

Option precedence per subcommand: explicit flags beat the optional JSON
config file (``--config``), which beats built-in defaults.  The config file
maps option names (with underscores) to values, e.g. ``{"steps": 500}``.

Exit codes: 0 success; 2 usage, validation, or file-format problems;
3 numerical failures (speed-limit, degenerate velocity, non-finite values).
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from .datasets import (
    DEFAULT_N_POINTS,
    DatasetSpec,
    HOLDOUT_FRACTION,
    generate,
    holdout_split,
    initial_velocity,
    source_points,
)
from .dynamics import DEFAULT_UNITS
from .errors import (
    DegenerateVelocityError,
    NonFiniteError,
    SchemaError,
    ShapeError,
    SpeedLimitError,
)
from .evaluate import SamplerConfig, config_digest, evaluate_model, make_report, render_table
from .figures import scatter_svg, write_svg
from .formats import (
    dataset_spec_from_header,
    physics_from_header,
    read_checkpoint,
    read_dataset,
    read_samples,
    write_checkpoint,
    write_dataset,
    write_report,
    write_samples,
)
from .relativity import PhysicsConfig
from .sampling import sample_form, sample_o1, sample_o1o2
from .training import TrainConfig, steps_for_epochs, train

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC = 0, 2, 3

HANDEDNESS = {"ccw": 1, "cw": -1}

GEN_DEFAULTS = {
    "n": None,
    "steps": 200,
    "duration": 1.0,
    "seed": 0,
    "variance": 0.3,
    "velocity_scale": 4.0,
    "initial_speed": 4.0,
    "core_speed": 2.0,
    "ring_speed": 6.0,
    "disc_radius": 1.0,
    "force_scale": 1.0,
    "perp_handedness": "ccw",
    "c": 10.0,
    "mass": 1.0,
    "threads": None,
}

TRAIN_DEFAULTS = {
    "steps": 20000,
    "epochs": None,
    "batch_size": 128,
    "lr": 1e-3,
    "seed": 0,
    "hidden": "64,64",
    "form_input_mode": "time",
    "o1o2_coupling": "detached",
    "holdout_fraction": HOLDOUT_FRACTION,
}

SAMPLE_DEFAULTS = {
    "n": None,
    "sampler_steps": 100,
    "seed": 0,
    "source": "heldout",
    "init_velocity": "dataset",
    "v0": None,
    "paths": False,
    "update": "momentum-exact",
}

EVAL_DEFAULTS = {"sampler_steps": 100, "mode": "paired", "reference": False}

PLOT_DEFAULTS = {"trajectories": 0, "title": None}


def _resolve(args: argparse.Namespace, defaults: dict) -> dict:
    """flags > --config file > defaults; rejects unknown config keys."""
    file_cfg: dict = {}
    if getattr(args, "config", None) is not None:
        with open(args.config, "r", encoding="utf-8") as fh:
            file_cfg = json.load(fh)
        if not isinstance(file_cfg, dict):
            raise ValueError(f"config file {args.config} must hold a JSON object")
        unknown = set(file_cfg) - set(defaults)
        if unknown:
            raise ValueError(f"config file has unknown keys: {sorted(unknown)}")
    resolved = {}
    for key, default in defaults.items():
        value = getattr(args, key, None)
        if value is None:
            value = file_cfg.get(key, default)
        resolved[key] = value
    return resolved


def _parse_hidden(text: str) -> tuple[int, ...]:
    try:
        dims = tuple(int(p) for p in str(text).split(","))
    except ValueError as e:
        raise ValueError(f"--hidden must be comma-separated integers, got {text!r}") from e
    if not dims or any(d < 1 for d in dims):
        raise ValueError(f"--hidden needs positive dims, got {text!r}")
    return dims


def _parse_v0(text: str) -> np.ndarray:
    parts = str(text).split(",")
    if len(parts) != 2:
        raise ValueError(f"--v0 must be 'vx,vy', got {text!r}")
    return np.array([float(parts[0]), float(parts[1])], dtype=np.float64)


# --- subcommands -------------------------------------------------------------


def cmd_gen_data(args: argparse.Namespace) -> int:
    opt = _resolve(args, GEN_DEFAULTS)
    spec = DatasetSpec(
        kind=args.dataset,
        n_points=opt["n"],
        n_steps=opt["steps"],
        duration=opt["duration"],
        seed=opt["seed"],
        source_variance=opt["variance"],
        velocity_scale=opt["velocity_scale"],
        initial_speed=opt["initial_speed"],
        core_speed=opt["core_speed"],
        ring_speed=opt["ring_speed"],
        disc_radius=opt["disc_radius"],
        force_scale=opt["force_scale"],
        handedness=HANDEDNESS[opt["perp_handedness"]],
    )
    physics = PhysicsConfig(c=opt["c"], m=opt["mass"])
    records = generate(spec, physics=physics, units=DEFAULT_UNITS, max_workers=opt["threads"])
    write_dataset(args.out, records, spec, physics, DEFAULT_UNITS)
    max_speed = max(float(np.max(np.sqrt(np.sum(r.v * r.v, axis=-1)))) for r in records)
    print(
        f"wrote {args.out}: {len(records)} x {spec.n_steps} step "
        f"{spec.kind} trajectories, duration {spec.duration} s"
    )
    print(f"max speed {max_speed:.6g} du/s ({max_speed / physics.c:.6g} c)")
    return EXIT_OK


def cmd_train(args: argparse.Namespace) -> int:
    opt = _resolve(args, TRAIN_DEFAULTS)
    header, records = read_dataset(args.data)
    physics = physics_from_header(header)

    fraction = float(opt["holdout_fraction"])
    if fraction > 0.0:
        train_records, _ = holdout_split(records, fraction)
    else:
        train_records = records

    steps = int(opt["steps"])
    if opt["epochs"] is not None:
        if args.steps is not None:
            raise ValueError("--steps and --epochs are mutually exclusive")
        steps = steps_for_epochs(float(opt["epochs"]), len(train_records), int(opt["batch_size"]))

    config = TrainConfig(
        method=args.method,
        steps=steps,
        batch_size=int(opt["batch_size"]),
        learning_rate=float(opt["lr"]),
        seed=int(opt["seed"]),
        hidden_dims=_parse_hidden(opt["hidden"]),
        form_input_mode=opt["form_input_mode"],
        o1o2_coupling=opt["o1o2_coupling"],
    )
    model = train(train_records, config, physics=physics, dataset_info=header["spec"])
    write_checkpoint(args.out, model)
    print(
        f"trained {config.method} on {len(train_records)} trajectories "
        f"({config.steps} steps, batch {config.batch_size}): final loss {model.final_loss:.6g}"
    )
    return EXIT_OK


def cmd_sample(args: argparse.Namespace) -> int:
    opt = _resolve(args, SAMPLE_DEFAULTS)
    model = read_checkpoint(args.model)

    if opt["source"] == "heldout":
        if args.data is None:
            raise ValueError("--source heldout needs --data to supply held-out source points")
        _, records = read_dataset(args.data)
        _, heldout = holdout_split(records)
        if opt["n"] is not None:
            heldout = heldout[: int(opt["n"])]
        indices = [r.index for r in heldout]
        x0 = np.stack([r.x0 for r in heldout])
        dataset_seed = None
    else:  # fresh draws from the model's source distribution
        if model.dataset_info is None:
            raise ValueError("--source noise needs a model trained with dataset info")
        n = int(opt["n"]) if opt["n"] is not None else 100
        base = DatasetSpec.from_dict(model.dataset_info)
        from dataclasses import replace

        spec = replace(base, seed=int(opt["seed"]), n_points=n)
        indices = list(range(n))
        x0 = source_points(spec, indices)
        dataset_seed = int(opt["seed"])

    sampler = SamplerConfig(n_steps=int(opt["sampler_steps"]), velocity_update=opt["update"])
    v0_arg = None
    if model.method == "form":
        if opt["init_velocity"] == "zero":
            v0_arg = "zero"
        elif opt["init_velocity"] == "explicit":
            if opt["v0"] is None:
                raise ValueError("--init-velocity explicit needs --v0 'vx,vy'")
            v0_arr = _parse_v0(opt["v0"])
            v0_arg = np.broadcast_to(v0_arr, x0.shape)
        path = sample_form(model, x0, sampler, v0=v0_arg)
    elif model.method == "o1":
        path = sample_o1(model, x0, sampler)
    else:
        path = sample_o1o2(model, x0, sampler)

    entries = []
    for row, index in enumerate(indices):
        entry: dict = {"index": int(index), "x0": x0[row]}
        if path.v is not None:
            entry["v0"] = path.v[0, row]
        entry["endpoint"] = path.x[-1, row]
        if opt["paths"]:
            entry["path"] = path.x[:, row]
        entries.append(entry)
    header_extra = {
        "method": model.method,
        "dataset": (model.dataset_info or {}).get("kind"),
        "source": opt["source"],
        "seed": dataset_seed,
        "sampler_steps": sampler.n_steps,
        "duration": model.duration,
        "init_velocity": opt["init_velocity"] if model.method == "form" else None,
        "velocity_update": opt["update"] if model.method == "form" else None,
    }
    write_samples(args.out, header_extra, entries)
    print(f"wrote {args.out}: {len(entries)} {model.method} endpoints ({sampler.n_steps} steps)")
    if path.v is not None:
        max_speed = float(np.max(np.sqrt(np.sum(path.v * path.v, axis=-1))))
        print(f"max sampled speed {max_speed:.6g} du/s ({max_speed / model.physics.c:.6g} c)")
    return EXIT_OK


def cmd_eval(args: argparse.Namespace) -> int:
    opt = _resolve(args, EVAL_DEFAULTS)
    datasets_by_kind: dict[str, tuple[dict, list]] = {}
    for path in args.data:
        header, records = read_dataset(path)
        kind = header["dataset"]
        if kind in datasets_by_kind:
            raise ValueError(f"two datasets of kind {kind!r} given; one per kind, please")
        datasets_by_kind[kind] = (header, records)

    heldouts = {kind: holdout_split(records)[1] for kind, (header, records) in datasets_by_kind.items()}
    sampler = SamplerConfig(n_steps=int(opt["sampler_steps"]))
    cells = []
    for model_path in args.model:
        model = read_checkpoint(model_path)
        kind = (model.dataset_info or {}).get("kind")
        if kind is None and len(datasets_by_kind) == 1:
            kind = next(iter(datasets_by_kind))
        if kind not in datasets_by_kind:
            raise ValueError(
                f"model {model_path} was trained on {kind!r}, but no such dataset was given"
            )
        cells.append(
            evaluate_model(model, heldouts[kind], sampler, mode=opt["mode"], dataset_name=kind)
        )

    metadata = {
        "sampler_steps": sampler.n_steps,
        "mode": opt["mode"],
        "datasets": {
            kind: {
                "n_points": header["n_trajectories"],
                "n_heldout": len(heldouts[kind]),
                "seed": header["spec"]["seed"],
            }
            for kind, (header, _) in datasets_by_kind.items()
        },
        "config_digest": config_digest({"sampler_steps": sampler.n_steps, "mode": opt["mode"]}),
    }
    report = make_report(cells, metadata)
    write_report(args.report, report)
    table = render_table(report, include_reference=bool(opt["reference"]))
    print(table, end="")
    print(f"wrote {args.report}")
    return EXIT_OK


def cmd_plot(args: argparse.Namespace) -> int:
    opt = _resolve(args, PLOT_DEFAULTS)
    n_traj = int(opt["trajectories"])
    if args.data is not None:
        header, records = read_dataset(args.data)
        source = np.stack([r.x0 for r in records])
        target = np.stack([r.endpoint for r in records])
        trajectories = [r.x for r in records[:n_traj]] if n_traj > 0 else []
        title = opt["title"] if opt["title"] is not None else header["dataset"]
    else:
        header, entries = read_samples(args.samples)
        source = np.array([e["x0"] for e in entries], dtype=np.float64)
        target = np.array([e["endpoint"] for e in entries], dtype=np.float64)
        with_paths = [e for e in entries if "path" in e][:n_traj] if n_traj > 0 else []
        trajectories = [np.asarray(e["path"], dtype=np.float64) for e in with_paths]
        default_title = f"{header.get('method', '?')} samples ({header.get('dataset') or 'custom'})"
        title = opt["title"] if opt["title"] is not None else default_title
    write_svg(args.out, scatter_svg(source, target, trajectories, title=title))
    print(f"wrote {args.out}")
    return EXIT_OK


# --- parser ------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="form-lab",
        description="Relativistic force matching: generate data, train, sample, evaluate, plot.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    btrue = argparse.BooleanOptionalAction

    g = sub.add_parser("gen-data", help="simulate a toy dataset and write NDJSON")
    g.add_argument("--dataset", required=True, choices=sorted(DEFAULT_N_POINTS))
    g.add_argument("--out", required=True)
    g.add_argument("--n", type=int)
    g.add_argument("--steps", type=int)
    g.add_argument("--duration", type=float)
    g.add_argument("--seed", type=int)
    g.add_argument("--variance", type=float, help="source Gaussian variance (onedot, halfmoons)")
    g.add_argument("--velocity-scale", type=float, dest="velocity_scale")
    g.add_argument("--initial-speed", type=float, dest="initial_speed")
    g.add_argument("--core-speed", type=float, dest="core_speed")
    g.add_argument("--ring-speed", type=float, dest="ring_speed")
    g.add_argument("--disc-radius", type=float, dest="disc_radius")
    g.add_argument("--force-scale", type=float, dest="force_scale")
    g.add_argument("--perp-handedness", choices=sorted(HANDEDNESS), dest="perp_handedness")
    g.add_argument("--c", type=float, help="speed of light (du/s)")
    g.add_argument("--mass", type=float)
    g.add_argument("--threads", type=int, help="worker threads (default: FORM_LAB_THREADS or CPU count)")
    g.add_argument("--config")
    g.set_defaults(func=cmd_gen_data)

    t = sub.add_parser("train", help="train o1 / o1o2 / form on a dataset file")
    t.add_argument("--data", required=True)
    t.add_argument("--out", required=True)
    t.add_argument("--method", required=True, choices=("o1", "o1o2", "form"))
    t.add_argument("--steps", type=int)
    t.add_argument("--epochs", type=float, help="alternative budget; steps = ceil(epochs*N/batch)")
    t.add_argument("--batch-size", type=int, dest="batch_size")
    t.add_argument("--lr", type=float)
    t.add_argument("--seed", type=int)
    t.add_argument("--hidden", help="comma-separated hidden widths, e.g. 64,64")
    t.add_argument("--form-input-mode", choices=("time", "time-position"), dest="form_input_mode")
    t.add_argument("--o1o2-coupling", choices=("detached", "joint"), dest="o1o2_coupling")
    t.add_argument(
        "--holdout-fraction",
        type=float,
        dest="holdout_fraction",
        help="fraction of trailing indices reserved for eval (0 trains on all)",
    )
    t.add_argument("--config")
    t.set_defaults(func=cmd_train)

    s = sub.add_parser("sample", help="run a trained model's sampler and write endpoints")
    s.add_argument("--model", required=True)
    s.add_argument("--out", required=True)
    s.add_argument("--data", help="dataset file for held-out source points")
    s.add_argument("--n", type=int)
    s.add_argument("--sampler-steps", "--M", type=int, dest="sampler_steps")
    s.add_argument("--seed", type=int, help="seed for --source noise draws")
    s.add_argument("--source", choices=("heldout", "noise"))
    s.add_argument("--init-velocity", choices=("dataset", "zero", "explicit"), dest="init_velocity")
    s.add_argument("--v0", help="explicit initial velocity 'vx,vy'")
    s.add_argument("--paths", action=btrue, help="store full paths, not just endpoints")
    s.add_argument("--update", choices=("momentum-exact", "euler"), help="force-sampler velocity update")
    s.add_argument("--config")
    s.set_defaults(func=cmd_sample)

    e = sub.add_parser("eval", help="score models on held-out endpoints and write a report")
    e.add_argument("--model", required=True, action="append", help="checkpoint (repeatable)")
    e.add_argument("--data", required=True, action="append", help="dataset file (repeatable)")
    e.add_argument("--report", required=True)
    e.add_argument("--sampler-steps", "--M", type=int, dest="sampler_steps")
    e.add_argument("--mode", choices=("paired", "chamfer"))
    e.add_argument("--reference", action=btrue, help="append previously reported losses")
    e.add_argument("--config")
    e.set_defaults(func=cmd_eval)

    p = sub.add_parser("plot", help="render a dataset or samples file as an SVG scatter")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--data")
    src.add_argument("--samples")
    p.add_argument("--out", required=True)
    p.add_argument("--trajectories", type=int, help="draw the first K paths")
    p.add_argument("--title")
    p.add_argument("--config")
    p.set_defaults(func=cmd_plot)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (SpeedLimitError, DegenerateVelocityError, NonFiniteError) as e:
        print(f"numerical failure: {e}", file=sys.stderr)
        return EXIT_NUMERIC
    except (SchemaError, ShapeError, ValueError, OSError, json.JSONDecodeError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
