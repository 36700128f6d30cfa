"""Command line interface: ``shape-transport {simulate,run,grids,distances}``.

Exit status is 0 on success, 2 for invalid input or arguments and 3 when
a numerical step fails. ``SHAPE_TRANSPORT_SEED`` overrides ``--seed``.
``--config FILE`` reads TOML defaults: top-level keys apply to every
command, a ``[simulate]`` (etc.) table to one command; explicit flags win.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import io
from . import simulation as sim
from .errors import NumericalError, ValidationError
from .pipelines import PipelineConfig, align_signs, run_pipeline
from .shapes import center, mopa_align, procrustes_distance, size_and_shape_distance
from .tps import bending_energy_of
from .transport import elastic_metric

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover - exercised on 3.10 only
    import tomli as tomllib

log = logging.getLogger("shape_transport")

EXIT_OK, EXIT_INVALID, EXIT_NUMERICAL = 0, 2, 3
SEED_ENV = "SHAPE_TRANSPORT_SEED"


# ---------------------------------------------------------------- helpers


def _resolve_seed(seed: int) -> int:
    env = os.environ.get(SEED_ENV)
    if env is None or env.strip() == "":
        return int(seed)
    try:
        return int(env)
    except ValueError:
        raise ValidationError(f"{SEED_ENV}={env!r} is not an integer") from None


def case_metadata(case: sim.DatasetCase, low_variance: bool = False) -> dict:
    return {
        "case_id": case.case_id,
        "seed": case.seed,
        "low_variance": low_variance,
        "cycles": [c.to_dict() for c in case.ground_truth],
        "bodies": [{"id": b.id, "config": b.config.tolist()} for b in case.bodies],
    }


def case_from_metadata(trajectories, meta: dict) -> sim.DatasetCase | None:
    """Rebuild the ground truth of a simulated file, or ``None`` if absent."""
    try:
        cycles = [
            sim.CycleSpec(
                c["family"], tuple(c["center"]), tuple(c["radii"]), int(c["samples"]),
                float(c.get("phase", 0.0)), c.get("bending_variant", "printed"),
            )
            for c in meta["cycles"]
        ]
        bodies = [sim.ReferenceBody(b["id"], np.array(b["config"], dtype=float)) for b in meta["bodies"]]
        return sim.DatasetCase(int(meta["case_id"]), trajectories, cycles, int(meta["seed"]), bodies)
    except (KeyError, TypeError, ValueError):
        return None


def ground_truth_parameters(case: sim.DatasetCase) -> np.ndarray:
    """``(eps, gamma)`` of every observation, stacked body-major."""
    return np.vstack([c.parameters() for c in case.ground_truth])


def _outputs_rel(out_dir: Path, paths) -> list[str]:
    return sorted(str(Path(p).relative_to(out_dir)) for p in paths)


# ---------------------------------------------------------------- commands


def cmd_simulate(args) -> int:
    seed = _resolve_seed(args.seed)
    cycles = None
    if args.cycle_center is not None or args.cycle_radii is not None or args.bending_variant:
        if args.case not in (1, 2):
            raise ValidationError("cycle overrides apply to the single-cycle cases 1 and 2")
        base = sim.default_cycles(args.case, args.frames)[0]
        changes = {}
        if args.cycle_center is not None:
            changes["center"] = tuple(args.cycle_center)
        if args.cycle_radii is not None:
            changes["radii"] = tuple(args.cycle_radii)
        if args.bending_variant:
            changes["bending_variant"] = args.bending_variant
        cycles = [replace(base, **changes)]
    bodies = sim.low_variance_bodies(seed) if args.low_variance else sim.make_reference_bodies(seed)
    case = sim.generate_case(args.case, cycles, bodies, seed, frames=args.frames, rotate=not args.no_rotate)
    out = Path(args.out)
    meta = case_metadata(case, args.low_variance)
    io.write_trajectories(case.set, out, meta)
    manifest = io.RunManifest(
        command="simulate",
        seed=seed,
        case_id=args.case,
        config={"frames": args.frames, "rotate": not args.no_rotate, "cycles": meta["cycles"]},
        input_digest=io.content_digest(io.trajectories_to_dict(case.set)),
        outputs=[out.name],
    )
    manifest.write(out.with_name(out.stem + ".manifest.json"))
    log.info("wrote %s (%d bodies x %d frames)", out, len(case.set), case.set.n)
    return EXIT_OK


def _pipeline_config(args, method: str) -> PipelineConfig:
    rule = {"first": "first_frame", "mean": "local_mean"}.get(args.local_ref, args.local_ref)
    scale = False if getattr(args, "no_scale_final", False) else None
    return PipelineConfig(method, rule, scale, (args.mu1, args.mu2))


def _report_rows(output) -> list[dict]:
    rows = []
    n = output.centered_set.n
    for idx, rep in enumerate(output.transport_reports):
        j, i = divmod(idx, n)
        rows.append(
            {
                "body_id": output.centered_set.trajectories[j].body_id,
                "frame": i,
                "elastic_discrepancy": rep.elastic_discrepancy,
                "closure_error": rep.closure_error,
                "source_energy": {"affine": rep.source_energy.affine, "bending": rep.source_energy.bending},
                "transported_energy": {
                    "affine": rep.transported_energy.affine,
                    "bending": rep.transported_energy.bending,
                },
            }
        )
    return rows


def cmd_run(args) -> int:
    data_path = Path(args.input)
    trajectories = io.read_trajectories(data_path)
    meta = io.read_metadata(data_path)
    config = _pipeline_config(args, args.pipeline)
    output = run_pipeline(trajectories, config)
    result = output.pca
    signs = None
    case = case_from_metadata(trajectories, meta) if meta else None
    if case is not None and result.n_components:
        result.scores, signs = align_signs(result.scores, ground_truth_parameters(case))
        result.loadings = result.loadings * signs[:, None]
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    pca_doc = io.pca_to_dict(result)
    pca_doc["pipeline"] = config.to_dict()
    pca_doc["sign_alignment"] = None if signs is None else signs.tolist()
    written = [
        io.write_json(pca_doc, out_dir / "pca.json"),
        io.write_trajectories(output.centered_set, out_dir / "transported.json"),
        io.write_json(_report_rows(output), out_dir / "reports.json"),
    ]
    ratios = 100 * result.explained_ratio
    title = f"{args.pipeline}: " + ", ".join(f"PC{i + 1} {r:.2f}%" for i, r in enumerate(ratios[:2]))
    from .plotting import write_pca_plot

    written.append(write_pca_plot(result, out_dir / "pca.svg", title=title))
    io.RunManifest(
        command="run",
        seed=meta.get("seed"),
        case_id=meta.get("case_id"),
        input_path=data_path.name,
        config=config.to_dict(),
        input_digest=io.content_digest(io.trajectories_to_dict(trajectories)),
        outputs=_outputs_rel(out_dir, written),
    ).write(out_dir / "manifest.json")
    print(canonical_summary(args.pipeline, result))
    return EXIT_OK


def canonical_summary(name: str, result) -> str:
    ratios = ", ".join(f"{100 * r:.4f}" for r in result.explained_ratio[:5])
    return f"{name}: {result.n_components} components, explained % [{ratios}]"


def cmd_grids(args) -> int:
    from .plotting import write_grid_plot

    data_path = Path(args.input)
    trajectories = io.read_trajectories(data_path)
    if not 0 <= args.frame < trajectories.n:
        raise ValidationError(f"frame {args.frame} outside 0..{trajectories.n - 1}")
    meta = io.read_metadata(data_path)
    config = _pipeline_config(args, args.pipeline)
    output = run_pipeline(trajectories, PipelineConfig(config.method, config.local_ref_rule, with_reports=False))
    gm = output.grand_mean
    case = case_from_metadata(trajectories, meta) if meta else None
    truth = None
    if case is not None and case.case_id in (1, 2):
        truth = sim.ground_truth_trajectory(case, gm)[args.frame]
    else:
        log.warning("no shared ground-truth cycle in %s; drawing transported grids only", data_path)
    out_dir = Path(args.out_dir)
    written, devs = [], {}
    for traj in output.centered_set:
        moved = traj.frames[args.frame]
        actual = truth if truth is not None else moved
        path = out_dir / f"grid_{args.pipeline}_{traj.body_id}_frame{args.frame}.svg"
        devs[traj.body_id] = write_grid_plot(
            (gm, actual), (gm, moved), path, resolution=args.resolution,
            title=f"{args.pipeline} {traj.body_id} frame {args.frame}",
        )
        written.append(path)
    summary = {"pipeline": args.pipeline, "frame": args.frame, "max_grid_deviation": devs}
    written.append(io.write_json(summary, out_dir / f"grids_{args.pipeline}_frame{args.frame}.json"))
    io.RunManifest(
        command="grids",
        seed=meta.get("seed"),
        case_id=meta.get("case_id"),
        input_path=data_path.name,
        config={**config.to_dict(), "frame": args.frame, "resolution": args.resolution},
        input_digest=io.content_digest(io.trajectories_to_dict(trajectories)),
        outputs=_outputs_rel(out_dir, written),
    ).write(out_dir / f"grids_{args.pipeline}_frame{args.frame}.manifest.json")
    print(json.dumps(summary, sort_keys=True))
    return EXIT_OK


def distance_table(trajectories, metric: str, coefficients=(1.0, 1.0)) -> dict:
    """Distances for the ``distances`` command.

    ``procrustes`` and ``size-and-shape`` give the matrix between the bodies'
    first frames. ``bending`` and ``elastic`` give, per body, the bending
    energy and the elastic squared norm of each frame's deformation from the
    body's first frame (MOPA-aligned to it).
    """
    if metric in ("procrustes", "size-and-shape"):
        fn = procrustes_distance if metric == "procrustes" else size_and_shape_distance
        firsts = [t.frames[0] for t in trajectories]
        M = [[fn(a, b) for b in firsts] for a in firsts]
        return {"metric": metric, "bodies": trajectories.body_ids, "matrix": M,
                "max": float(np.max(M))}
    per_body = {}
    for t in trajectories:
        X = center(t.frames[0])
        values = []
        for frame in t.frames:
            Xp, _ = mopa_align(center(frame), X)
            if metric == "bending":
                values.append(bending_energy_of(X, Xp))
            else:
                values.append(elastic_metric(X, Xp - X, Xp - X, coefficients))
        per_body[t.body_id] = values
    return {"metric": metric, "values": per_body}


def cmd_distances(args) -> int:
    data_path = Path(args.input)
    trajectories = io.read_trajectories(data_path)
    table = distance_table(trajectories, args.metric, (args.mu1, args.mu2))
    if args.out:
        out = Path(args.out)
        io.write_json(table, out)
        io.RunManifest(
            command="distances",
            input_path=data_path.name,
            config={"metric": args.metric, "elastic_coefficients": [args.mu1, args.mu2]},
            input_digest=io.content_digest(io.trajectories_to_dict(trajectories)),
            outputs=[out.name],
        ).write(out.with_name(out.stem + ".manifest.json"))
    else:
        sys.stdout.write(io.canonical_json(table))
    return EXIT_OK


# ---------------------------------------------------------------- parser


def _add_pipeline_options(p, choices):
    p.add_argument("--pipeline", choices=choices, required=True)
    p.add_argument("--local-ref", choices=["first", "mean"], default="first")
    p.add_argument("--mu1", type=float, default=1.0, help="affine elastic coefficient")
    p.add_argument("--mu2", type=float, default=1.0, help="bending elastic coefficient")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="shape-transport", description=__doc__.splitlines()[0])
    parser.add_argument("--config", help="TOML file with default option values")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="generate a synthetic case")
    p.add_argument("--case", type=int, choices=[1, 2, 3, 4], required=True)
    p.add_argument("--seed", type=int, default=sim.DEFAULT_SEED)
    p.add_argument("--frames", type=int, default=20)
    p.add_argument("--out", required=True)
    p.add_argument("--cycle-center", type=float, nargs=2, metavar=("EPS0", "GAMMA0"))
    p.add_argument("--cycle-radii", type=float, nargs=2, metavar=("A", "B"))
    p.add_argument("--bending-variant", choices=sorted(sim.BENDING_VARIANTS))
    p.add_argument("--low-variance", action="store_true", help="use closely similar reference bodies")
    p.add_argument("--no-rotate", action="store_true", help="skip the random rotations")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("run", help="run a pipeline and write scores, plots and reports")
    _add_pipeline_options(p, ["classic", "lc", "dt"])
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--no-scale-final", action="store_true")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("grids", help="superimposed real and transported deformation grids")
    _add_pipeline_options(p, ["lc", "dt"])
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--frame", type=int, required=True)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--resolution", type=int, default=10)
    p.set_defaults(func=cmd_grids)

    p = sub.add_parser("distances", help="distance tables")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--metric", choices=["procrustes", "size-and-shape", "bending", "elastic"], required=True)
    p.add_argument("--mu1", type=float, default=1.0)
    p.add_argument("--mu2", type=float, default=1.0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_distances)
    return parser


def _config_defaults(path: str, command: str) -> dict:
    try:
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
    except OSError as exc:
        raise ValidationError(f"cannot read config {path}: {exc}") from None
    except tomllib.TOMLDecodeError as exc:
        raise ValidationError(f"{path}: {exc}") from None
    flat = {k: v for k, v in data.items() if not isinstance(v, dict)}
    flat.update(data.get(command, {}))
    return {k.replace("-", "_"): v for k, v in flat.items()}


def _apply_config(parser: argparse.ArgumentParser, argv: list[str]) -> None:
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    subparsers = next(a for a in parser._actions if isinstance(a, argparse._SubParsersAction))
    command = next((a for a in argv if a in subparsers.choices), None)
    if not known.config or command is None:
        return
    defaults = _config_defaults(known.config, command)
    sub = subparsers.choices[command]
    actions = {a.dest: a for a in sub._actions}
    unknown = sorted(set(defaults) - set(actions) - {"config", "verbose"})
    if unknown:
        raise ValidationError(f"unknown config keys for {command}: {', '.join(unknown)}")
    for key in defaults:
        if key in actions:
            actions[key].required = False
    sub.set_defaults(**{k: v for k, v in defaults.items() if k in actions})


def main(argv=None) -> int:
    parser = build_parser()
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        _apply_config(parser, argv)
        try:
            args = parser.parse_args(argv)
        except SystemExit as exc:
            return int(exc.code or 0)
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
        return args.func(args)
    except (NumericalError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (ValidationError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
