"""Command line interface: run, bench, synth, convert-check.

All randomness flows from --seed through per-sequence derived seeds, so
reports and label files are byte-reproducible for a fixed configuration and
independent of --jobs. Output files are written atomically (temp + rename).
"""

import argparse
import io
import logging
import os
import statistics
import sys
import tempfile
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

from .config import SegmentationConfig
from .errors import MosegError
from .fusion import (
    build_views,
    fuse_coregularization,
    fuse_kernel_addition,
    fuse_subset_constrained,
)
from .geometry import MODEL_ORDER
from .ork import save_affinity
from .seeding import child_seed
from .spectral import cluster_kmeans
from .synthlab import (
    ARCHETYPES,
    classification_error,
    load_suite_manifest,
    make_benchmark_suite,
    prevalence_error,
    write_suite,
)
from .trajectory_io import load_trajectories

log = logging.getLogger("moseg")

SINGLE_VIEW_METHODS = {kind.value: kind for kind in MODEL_ORDER}
FUSION_METHODS = ("keradd", "coreg", "subset")
ALL_METHODS = tuple(SINGLE_VIEW_METHODS) + FUSION_METHODS

_EXIT_CODES = {"config": 2, "io": 3, "numerical": 4}


@dataclass
class RunConfig:
    """Everything one `moseg run` needs; mirrors the CLI flags."""

    inputs: list
    num_motions: int
    method: str
    output_dir: str = "."
    jobs: int = 1
    dump_kernels: bool = False
    dump_trace: bool = False
    segmentation: SegmentationConfig = field(default_factory=SegmentationConfig)


def _atomic_write(path, text):
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".moseg-tmp-")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _labels_text(labeling):
    return "\n".join(str(int(v)) for v in labeling.labels) + "\n"


def _trace_csv(rows):
    out = io.StringIO()
    out.write("step,sweep,view,trace_term,coupling_term,total\n")
    for row in rows:
        out.write(
            f"{row['step']},{row['sweep']},{row['view']},"
            f"{row['trace_term']:.12g},{row['coupling_term']:.12g},{row['total']:.12g}\n"
        )
    return out.getvalue()


def run_method_on_views(method, views, config):
    """Labeling (and optional trace rows) for one method on shared views."""
    if method in SINGLE_VIEW_METHODS:
        kind = SINGLE_VIEW_METHODS[method]
        index = MODEL_ORDER.index(kind)
        labeling = cluster_kmeans(
            views.embeddings[index],
            views.num_motions,
            restarts=config.restarts,
            seed=child_seed(config.seed, "single-view", kind.value),
        )
        return labeling, None
    if method == "keradd":
        return fuse_kernel_addition(views, config=config), None
    if method == "coreg":
        result = fuse_coregularization(views, config=config)
        return result.labeling, result.trace
    if method == "subset":
        result = fuse_subset_constrained(views, config=config)
        return result.labeling, result.trace
    raise MosegError(f"unknown method {method!r}")


def _segment_file(path, run_config):
    """Worker: one sequence end to end. Returns (name, labeling, trace, error)."""
    traj = load_trajectories(path)
    name = os.path.splitext(os.path.basename(path))[0]
    seq_config = run_config.segmentation.with_seed(
        child_seed(run_config.segmentation.seed, "sequence", name)
    )
    views = build_views(traj, run_config.num_motions, seq_config)
    labeling, trace = run_method_on_views(run_config.method, views, seq_config)
    error = None
    if traj.labels is not None:
        error = classification_error(labeling, traj.labels)
    dumps = {}
    if run_config.dump_kernels:
        dumps["kernels"] = [(aff.kind.value, aff) for aff in views.affinities]
    return name, labeling, trace, error, dumps


def cmd_run(run_config):
    os.makedirs(run_config.output_dir, exist_ok=True)
    results = []
    if run_config.jobs > 1 and len(run_config.inputs) > 1:
        with ProcessPoolExecutor(max_workers=run_config.jobs) as pool:
            futures = [
                pool.submit(_segment_file, path, run_config) for path in run_config.inputs
            ]
            results = [f.result() for f in futures]
    else:
        results = [_segment_file(path, run_config) for path in run_config.inputs]

    errors = []
    report_lines = ["sequence,method,error"]
    for name, labeling, trace, error, dumps in results:
        _atomic_write(
            os.path.join(run_config.output_dir, f"{name}.labels.txt"),
            _labels_text(labeling),
        )
        if run_config.dump_trace and trace is not None:
            _atomic_write(
                os.path.join(run_config.output_dir, f"{name}.trace.csv"),
                _trace_csv(trace),
            )
        for view_name, affinity in dumps.get("kernels", []):
            save_affinity(
                affinity,
                os.path.join(run_config.output_dir, f"{name}.{view_name}.kernel.txt"),
            )
        cell = "NA" if error is None else f"{error:.6f}"
        report_lines.append(f"{name},{run_config.method},{cell}")
        if error is not None:
            errors.append(error)
    if errors:
        report_lines.append(f"__mean__,{run_config.method},{statistics.mean(errors):.6f}")
        report_lines.append(f"__median__,{run_config.method},{statistics.median(errors):.6f}")
    _atomic_write(
        os.path.join(run_config.output_dir, "run.report.csv"),
        "\n".join(report_lines) + "\n",
    )
    if errors:
        print(f"mean error {statistics.mean(errors):.4f} over {len(errors)} labeled sequence(s)")
    print(f"wrote {len(results)} label file(s) to {run_config.output_dir}")
    return 0


def _bench_sequence(record, methods, base_config, num_motions_override=None):
    traj = load_trajectories(record["path"])
    num_motions = num_motions_override or record["num_motions"]
    seq_config = base_config.with_seed(
        child_seed(base_config.seed, "sequence", record["name"])
    )
    cells = {}
    views = None
    for method in methods:
        try:
            if views is None:
                views = build_views(traj, num_motions, seq_config)
            labeling, _ = run_method_on_views(method, views, seq_config)
            if traj.labels is None:
                cells[method] = "NA"
            else:
                cells[method] = classification_error(labeling, traj.labels)
        except MosegError as exc:
            log.warning("%s on %s failed: %s", method, record["name"], exc)
            cells[method] = f"ERR:{exc.category}"
    cells["prevalence"] = (
        prevalence_error(traj.labels) if traj.labels is not None else "NA"
    )
    return record["name"], cells


def cmd_bench(manifest_path, methods, run_config):
    records = load_suite_manifest(manifest_path)
    base_config = run_config.segmentation
    rows = []
    if run_config.jobs > 1 and len(records) > 1:
        with ProcessPoolExecutor(max_workers=run_config.jobs) as pool:
            futures = [
                pool.submit(_bench_sequence, rec, methods, base_config) for rec in records
            ]
            rows = [f.result() for f in futures]
    else:
        rows = [_bench_sequence(rec, methods, base_config) for rec in records]

    columns = list(methods) + ["prevalence"]
    lines = ["sequence," + ",".join(columns)]
    failed = False
    for name, cells in rows:
        rendered = []
        for col in columns:
            value = cells[col]
            if isinstance(value, float):
                rendered.append(f"{value:.6f}")
            else:
                rendered.append(str(value))
                if str(value).startswith("ERR"):
                    failed = True
        lines.append(f"{name}," + ",".join(rendered))
    for agg_name, agg in (("__mean__", statistics.mean), ("__median__", statistics.median)):
        rendered = []
        for col in columns:
            values = [cells[col] for _, cells in rows if isinstance(cells[col], float)]
            rendered.append(f"{agg(values):.6f}" if values else "NA")
        lines.append(f"{agg_name}," + ",".join(rendered))
    table = "\n".join(lines) + "\n"
    os.makedirs(run_config.output_dir, exist_ok=True)
    _atomic_write(os.path.join(run_config.output_dir, "bench.report.csv"), table)
    print(table, end="")
    return 1 if failed else 0


def cmd_synth(archetype, seed, outdir):
    sequences = make_benchmark_suite(archetype, seed)
    manifest = write_suite(sequences, outdir)
    print(f"wrote {len(sequences)} sequences and manifest {manifest}")
    return 0


def cmd_convert_check(paths):
    status = 0
    for path in paths:
        try:
            traj = load_trajectories(path)
        except MosegError as exc:
            print(f"FAIL {path}: {exc}")
            status = _EXIT_CODES.get(exc.category, 1)
            continue
        visible = traj.visibility.mean() * 100.0
        motions = traj.num_motions if traj.labels is not None else "unknown"
        print(
            f"OK {path}: F={traj.num_frames} N={traj.num_points} "
            f"M={motions} visible={visible:.1f}%"
        )
    return status


def _add_common_flags(parser):
    parser.add_argument("--budget", type=int, default=None,
                        help="hypotheses per model family (default 500*F)")
    parser.add_argument("--h-fraction", type=float, default=None)
    parser.add_argument("--epsilon-quantile", type=float, default=None)
    parser.add_argument("--lambda", dest="lam", type=float, default=None,
                        help="co-regularization weight (default 1e-2)")
    parser.add_argument("--gamma", type=float, default=None,
                        help="subset-constraint weight (default 1e-2)")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--restarts", type=int, default=None)
    parser.add_argument("--jobs", type=int, default=1)
    parser.add_argument("--output-dir", default=".")
    parser.add_argument("--no-kernel-rescale", action="store_true",
                        help="sum raw kernels without per-view unit-max scaling")


def _segmentation_config(args, method=None):
    defaults = SegmentationConfig()
    if method is not None:
        if args.lam is not None and method != "coreg":
            log.warning("--lambda is ignored by method %s", method)
        if args.gamma is not None and method != "subset":
            log.warning("--gamma is ignored by method %s", method)
    return SegmentationConfig(
        budget=args.budget,
        h_fraction=defaults.h_fraction if args.h_fraction is None else args.h_fraction,
        epsilon_quantile=(
            defaults.epsilon_quantile if args.epsilon_quantile is None else args.epsilon_quantile
        ),
        lam=defaults.lam if args.lam is None else args.lam,
        gamma=defaults.gamma if args.gamma is None else args.gamma,
        restarts=defaults.restarts if args.restarts is None else args.restarts,
        seed=args.seed,
        kernel_rescale=not args.no_kernel_rescale,
    )


def build_parser():
    parser = argparse.ArgumentParser(
        prog="moseg",
        description="Motion segmentation of tracked trajectories by fusing "
        "affine, homography, and fundamental-matrix affinities.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="segment trajectory files")
    run_p.add_argument("inputs", nargs="+", help="trajectory text files")
    run_p.add_argument("-M", "--num-motions", type=int, required=True)
    run_p.add_argument("--method", choices=ALL_METHODS, default="subset")
    run_p.add_argument("--dump-kernels", action="store_true")
    run_p.add_argument("--dump-trace", action="store_true")
    _add_common_flags(run_p)

    bench_p = sub.add_parser("bench", help="compare methods over a suite manifest")
    bench_p.add_argument("manifest")
    bench_p.add_argument(
        "--methods",
        default=",".join(ALL_METHODS),
        help="comma-separated subset of " + ",".join(ALL_METHODS),
    )
    _add_common_flags(bench_p)

    synth_p = sub.add_parser("synth", help="generate a synthetic benchmark suite")
    synth_p.add_argument("archetype", choices=ARCHETYPES)
    synth_p.add_argument("--seed", type=int, default=0)
    synth_p.add_argument("--outdir", required=True)

    check_p = sub.add_parser("convert-check", help="validate trajectory files")
    check_p.add_argument("inputs", nargs="+")

    return parser


def main(argv=None):
    logging.basicConfig(
        level=os.environ.get("MOSEG_LOG", "WARNING").upper(),
        format="%(levelname)s %(name)s: %(message)s",
    )
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "run":
            config = RunConfig(
                inputs=args.inputs,
                num_motions=args.num_motions,
                method=args.method,
                output_dir=args.output_dir,
                jobs=args.jobs,
                dump_kernels=args.dump_kernels,
                dump_trace=args.dump_trace,
                segmentation=_segmentation_config(args, method=args.method),
            )
            return cmd_run(config)
        if args.command == "bench":
            methods = [m.strip() for m in args.methods.split(",") if m.strip()]
            unknown = [m for m in methods if m not in ALL_METHODS]
            if unknown:
                print(f"error [config]: unknown methods {unknown}", file=sys.stderr)
                return _EXIT_CODES["config"]
            config = RunConfig(
                inputs=[],
                num_motions=0,
                method="bench",
                output_dir=args.output_dir,
                jobs=args.jobs,
                segmentation=_segmentation_config(args),
            )
            return cmd_bench(args.manifest, methods, config)
        if args.command == "synth":
            return cmd_synth(args.archetype, args.seed, args.outdir)
        if args.command == "convert-check":
            return cmd_convert_check(args.inputs)
        parser.error(f"unknown command {args.command}")
    except MosegError as exc:
        print(f"error [{exc.category}]: {exc}", file=sys.stderr)
        return _EXIT_CODES.get(exc.category, 1)
    except OSError as exc:
        print(f"error [io]: {exc}", file=sys.stderr)
        return _EXIT_CODES["io"]
    return 0


if __name__ == "__main__":
    sys.exit(main())
