"""Command-line entry point wiring the full pipeline.

Subcommands: synth, train, solve, induce, e2e, eval, render.  A key=value
config file can preset any flag (flags override the file); the effective
configuration and seed are echoed into every output directory so a run can
be reproduced byte-for-byte from its artifacts.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .composer import SamplerConfig, sample_arrangement
from .diffusion import ModelBank, TrainConfig, cosine_schedule, train_denoiser
from .errors import ClientError, NumericError, ValidationError
from .evaluation import evaluate
from .geometry import Container, load_scene, save_scene
from .induction import (
    LiveClient,
    RecordingClient,
    ReplayClient,
    Transcript,
    execute_program,
    induce_program,
    load_examples,
    parse_spec,
    reference_program,
)
from .induction.interp import Program, ProgramError
from .relations import load_graph, lookup, relation_names, sample_positive, save_graph
from .relations.generators import read_dataset, write_dataset
from .render import RenderOptions, render_svg
from .seeds import spawn_seed, stream

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_IO = 3
EXIT_CLIENT = 4
EXIT_NUMERIC = 5

DEFAULT_T = 1500
TEST_MODE_T = 200


def _read_config_file(path: str | None) -> dict:
    if not path:
        return {}
    values = {}
    with open(path, encoding="utf-8") as fh:
        for raw in fh:
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ValidationError(f"config line {raw!r} is not KEY=VALUE")
            key, _, value = line.partition("=")
            values[key.strip().lower().replace("-", "_")] = value.strip()
    return values


def _merge(args: argparse.Namespace, file_cfg: dict, key: str, default, cast=str):
    """Flag > config file > builtin default."""
    flag_value = getattr(args, key, None)
    if flag_value is not None:
        return flag_value
    if key in file_cfg:
        raw = file_cfg[key]
        if cast is bool:
            return raw.lower() in ("1", "true", "yes", "on")
        return cast(raw)
    return default


def _write_json(path: Path, doc: dict) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _echo(out_dir: Path, command: str, config: dict) -> None:
    _write_json(out_dir / "run.json", {"command": command, "config": config})


# ---------------------------------------------------------------------------


def cmd_synth(args, file_cfg) -> int:
    n = _merge(args, file_cfg, "count", 1000, int)
    seed = _merge(args, file_cfg, "seed", 0, int)
    if n < 1:
        raise ValidationError("-n must be >= 1")
    names = args.relation or relation_names()
    for name in names:
        lookup(name)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    container = Container()
    counts = {}
    for name in names:
        rng = stream(seed, "synth", name)
        examples = sample_positive(name, container, rng, n=n)
        write_dataset(examples, out_dir / f"{name}.jsonl")
        counts[name] = len(examples)
    config = {"count": n, "seed": seed, "relations": names}
    _write_json(out_dir / "manifest.json", {"counts": counts, "seed": seed, "config": config})
    _echo(out_dir, "synth", config)
    print(f"wrote {sum(counts.values())} examples for {len(counts)} relations to {out_dir}")
    return EXIT_OK


def cmd_train(args, file_cfg) -> int:
    seed = _merge(args, file_cfg, "seed", 0, int)
    test_mode = bool(args.test_mode or file_cfg.get("test_mode") in ("1", "true", "yes", "on"))
    t_steps = _merge(args, file_cfg, "timesteps", TEST_MODE_T if test_mode else DEFAULT_T, int)
    epochs = _merge(args, file_cfg, "epochs", None, int)
    data_dir = Path(args.data)
    if not data_dir.is_dir():
        raise FileNotFoundError(f"dataset directory {data_dir} not found")
    names = args.relation or sorted(p.stem for p in data_dir.glob("*.jsonl"))
    if not names:
        raise ValidationError(f"no datasets in {data_dir}")
    schedule = cosine_schedule(t_steps)
    container = Container()
    models = {}
    for name in names:
        kind = lookup(name)
        path = data_dir / f"{name}.jsonl"
        if not path.exists():
            raise FileNotFoundError(f"no dataset for relation {name!r} at {path}")
        examples = read_dataset(path)
        cfg = TrainConfig(epochs=epochs if epochs is not None else 400, seed=spawn_seed(seed, "train", name))
        trained = train_denoiser(kind, examples, container, schedule, cfg)
        best = trained.history["best_epoch"]
        val = trained.history["val_loss"]
        print(f"{name}: {len(examples)} examples, val {val[0]:.4f} -> {min(val):.4f} (best epoch {best})")
        models[name] = trained
    bank = ModelBank(models)
    bank.save(args.out)
    config = {"seed": seed, "timesteps": t_steps, "epochs": epochs, "test_mode": test_mode, "relations": names}
    _echo(Path(args.out), "train", config)
    print(f"saved bank with {len(models)} models to {args.out}")
    return EXIT_OK


def _sampler_config(args, file_cfg, bank: ModelBank) -> SamplerConfig:
    return SamplerConfig(
        T=bank.schedule.T,
        mcmc_steps=_merge(args, file_cfg, "mcmc_steps", 20, int),
        noise_mode=_merge(args, file_cfg, "noise_mode", "standard"),
        transition=_merge(args, file_cfg, "transition", "rescore"),
        seed=_merge(args, file_cfg, "seed", 0, int),
        reach_radius_m=_merge(args, file_cfg, "reach_radius", None, float),
    )


def _solve_and_write(scene, graph, bank, config: SamplerConfig, out_dir: Path, command: str) -> dict:
    rng = stream(config.seed, "sample")
    result = sample_arrangement(bank, graph, scene, config, rng)
    solved = scene.with_poses(result.poses)
    save_scene(solved, out_dir / "scene.json")
    report = evaluate(solved, result.poses, graph, config.reach_radius_m).to_json()
    report["config"] = config.to_json()
    report["schedule_fingerprint"] = bank.fingerprint()
    _write_json(out_dir / "report.json", report)
    radius = None
    if config.reach_radius_m is not None:
        radius = config.reach_radius_m / scene.container.meters_per_unit
    svg = render_svg(solved, result.poses, RenderOptions(reach_radius_units=radius))
    (out_dir / "scene.svg").write_text(svg, encoding="utf-8")
    _echo(out_dir, command, config.to_json())
    return report


def cmd_solve(args, file_cfg) -> int:
    bank = ModelBank.load(args.bank)
    scene = load_scene(args.scene)
    graph = load_graph(args.graph)
    config = _sampler_config(args, file_cfg, bank)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    report = _solve_and_write(scene, graph, bank, config, out_dir, "solve")
    print(f"feasibility {report['feasibility']:.3f}, functionality {report['functionality']:.3f} -> {out_dir}")
    return EXIT_OK


def _make_client(args):
    transcript_path = getattr(args, "transcript", None)
    record = getattr(args, "record", None)
    if transcript_path and not record:
        return ReplayClient(Transcript.load(transcript_path))
    live = LiveClient()
    if record:
        return RecordingClient(live, autosave_path=record)
    return live


def cmd_induce(args, file_cfg) -> int:
    spec = parse_spec(Path(args.spec).read_text(encoding="utf-8"))
    examples = load_examples(args.examples)
    client = _make_client(args)
    program, log, statuses = induce_program(spec, examples, client, family=args.family or "")
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    _write_json(out_dir / "program.json", program.to_json())
    _write_json(out_dir / "verification_log.json", {"functions": log.to_json(), "statuses": statuses})
    _echo(out_dir, "induce", {"spec": str(args.spec), "examples": str(args.examples), "family": args.family or ""})
    failed = [name for name, st in statuses.items() if st != "passed"]
    for record in log.to_json():
        print(f"{record['function']}: {record['status']} after {record['attempts']} attempt(s)")
    if failed:
        print(f"functions failing verification: {failed}", file=sys.stderr)
        return EXIT_VALIDATION
    print(f"induced program with {len(program.functions)} functions -> {out_dir}")
    return EXIT_OK


def cmd_e2e(args, file_cfg) -> int:
    scene = load_scene(args.scene)
    if args.program:
        with open(args.program, encoding="utf-8") as fh:
            program = Program.from_json(json.load(fh))
        statuses = None
    else:
        program = reference_program(args.family or "dining")
        statuses = None
    client = _make_client(args)
    graph = execute_program(program, args.desc, scene.object_ids(), client, statuses=statuses)
    bank = ModelBank.load(args.bank)
    config = _sampler_config(args, file_cfg, bank)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    save_graph(graph, out_dir / "graph.json")
    report = _solve_and_write(scene, graph, bank, config, out_dir, "e2e")
    print(
        f"{len(graph)} literals; feasibility {report['feasibility']:.3f}, "
        f"functionality {report['functionality']:.3f} -> {out_dir}"
    )
    return EXIT_OK


def cmd_eval(args, file_cfg) -> int:
    scene = load_scene(args.scene)
    if scene.poses is None:
        raise ValidationError("scene carries no poses to evaluate")
    graph = load_graph(args.graph) if args.graph else None
    reach = _merge(args, file_cfg, "reach_radius", None, float)
    report = evaluate(scene, scene.poses, graph, reach).to_json()
    out = Path(args.out) if args.out else None
    if out:
        out.mkdir(parents=True, exist_ok=True)
        _write_json(out / "report.json", report)
        _echo(out, "eval", {"scene": str(args.scene), "graph": str(args.graph or "")})
    print(json.dumps(report, indent=2, sort_keys=True))
    return EXIT_OK


def cmd_render(args, file_cfg) -> int:
    scene = load_scene(args.scene)
    if scene.poses is None:
        raise ValidationError("scene carries no poses to render")
    svg = render_svg(scene, scene.poses, RenderOptions())
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(svg, encoding="utf-8")
    print(f"wrote {out}")
    return EXIT_OK


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="arrangekit", description=__doc__)
    parser.add_argument("--config", help="key=value config file; flags override its values")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate synthetic positive-example datasets")
    p.add_argument("--relation", action="append", help="relation name (repeatable; default: all)")
    p.add_argument("-n", "--count", type=int, default=None)
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=None)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("train", help="train per-relation denoisers into a model bank")
    p.add_argument("--data", required=True, help="dataset directory from synth")
    p.add_argument("--relation", action="append")
    p.add_argument("-T", "--timesteps", type=int, default=None)
    p.add_argument("--epochs", type=int, default=None)
    p.add_argument("--test-mode", action="store_true", help="reduced schedule (T=200)")
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=None)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("solve", help="ground a relation graph into poses")
    p.add_argument("--scene", required=True)
    p.add_argument("--graph", required=True)
    p.add_argument("--bank", required=True)
    p.add_argument("-M", "--mcmc-steps", type=int, default=None)
    p.add_argument("--noise-mode", choices=["standard", "ula_sqrt2"], default=None)
    p.add_argument("--transition", choices=["rescore", "hybrid"], default=None)
    p.add_argument("--reach-radius", type=float, default=None, help="reachability radius in meters")
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=None)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("induce", help="induce an arrangement program from a task spec + examples")
    p.add_argument("--spec", required=True)
    p.add_argument("--examples", required=True)
    p.add_argument("--family", default="dining")
    p.add_argument("--transcript", help="replay transcript (no network)")
    p.add_argument("--record", help="record live exchanges to this transcript path")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_induce)

    p = sub.add_parser("e2e", help="instruction -> graph -> poses -> report")
    p.add_argument("--desc", required=True, help="natural-language instruction")
    p.add_argument("--scene", required=True, help="scene JSON with object dimensions")
    p.add_argument("--program", help="induced program JSON (default: built-in family program)")
    p.add_argument("--family", default="dining")
    p.add_argument("--bank", required=True)
    p.add_argument("--transcript", help="replay transcript for call_LLM sites")
    p.add_argument("--record", help="record live exchanges to this transcript path")
    p.add_argument("-M", "--mcmc-steps", type=int, default=None)
    p.add_argument("--noise-mode", choices=["standard", "ula_sqrt2"], default=None)
    p.add_argument("--transition", choices=["rescore", "hybrid"], default=None)
    p.add_argument("--reach-radius", type=float, default=None)
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=None)
    p.set_defaults(func=cmd_e2e)

    p = sub.add_parser("eval", help="score an arranged scene")
    p.add_argument("--scene", required=True)
    p.add_argument("--graph")
    p.add_argument("--reach-radius", type=float, default=None)
    p.add_argument("--out")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("render", help="render a scene to SVG")
    p.add_argument("--scene", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_render)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        file_cfg = _read_config_file(args.config)
        return args.func(args, file_cfg)
    except (ValidationError, ProgramError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (OSError, json.JSONDecodeError) as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ClientError as exc:
        print(f"client error: {exc}", file=sys.stderr)
        return EXIT_CLIENT
    except NumericError as exc:
        print(f"numeric error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
