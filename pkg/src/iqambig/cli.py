"""Command line driver: ladder export, interval scans, benchmarks, maps.

Subcommands
-----------
ladder      build distortion ladders and export rungs plus a manifest
intervals   run the full ambiguity-interval experiment, write CSVs
benchmark   accuracy statistics against subjective ratings
vdpmap      visualize the perceivableness map of one image pair

Exit codes: 0 success, 1 validation error, 2 runtime error. All outputs
are deterministic for a given configuration; every file gets a metadata
sidecar carrying the configuration digest.
"""

import argparse
import csv
import json
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import __version__
from .ambiguity import (
    LadderJndOracle,
    ambiguity_intervals,
    canonical_score_range,
    pooled_widths,
    side_statistics,
    summarize_widths,
)
from .config import ValidationError, config_digest, default_config, parse_config, validate_config
from .degrade import build_ladder, export_ladder, write_manifest
from .display import display_model
from .imgio import PixelImage, load_image, make_fixture, save_image, to_grayscale
from .metrics import BUILTIN_METRICS, ScoreTable, ingest_scores, measure_quality
from .stats import benchmark, ingest_subjective
from .svgplot import accuracy_ambiguity_chart
from .vdp import map_summary, vdp


def _fmt(value):
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        if math.isnan(value):
            return "nan"
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return format(value, ".9g")
    return str(value)


def _write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(cell) for cell in row])


def _write_sidecar(path, digest):
    meta = {"config_digest": digest, "tool": "iqambig", "version": __version__}
    Path(f"{path}.meta.json").write_text(json.dumps(meta, sort_keys=True) + "\n")


def _load_contents(cfg):
    contents = []
    for spec in cfg.fixtures:
        contents.append((spec.name, make_fixture(spec.kind, spec.width, spec.height, spec.seed)))
    for path in cfg.images:
        contents.append((Path(path).stem, to_grayscale(load_image(path))))
    names = [name for name, _ in contents]
    if len(set(names)) != len(names):
        raise ValidationError(f"content names are not unique: {names}")
    return contents


def _merge_score_tables(paths):
    entries = {}
    descriptors = dict(BUILTIN_METRICS)
    for path in paths:
        table = ingest_scores(path)
        for metric, desc in table.descriptors.items():
            if metric in descriptors and descriptors[metric].polarity != desc.polarity:
                raise ValidationError(f"{path}: polarity conflict for metric {metric!r}")
            descriptors.setdefault(metric, desc)
        for key, value in table.entries.items():
            if key in entries:
                raise ValidationError(f"{path}: duplicate score for {key}")
            entries[key] = value
    return ScoreTable(entries=entries, descriptors=descriptors)


def _score_ladders(cfg, contents, external):
    """Build every ladder and score every rung on the canonical scale."""
    ladders = {}
    scores = {}
    for name, src in contents:
        for dist in cfg.distortions:
            ladder = build_ladder(src, dist, cfg.levels, cfg.seed, content_name=name)
            ladders[(name, dist.kind)] = ladder
            for metric in cfg.metrics:
                values = []
                for level, rung in enumerate(ladder.images, start=1):
                    if metric in BUILTIN_METRICS:
                        values.append(measure_quality(metric, src, rung))
                    else:
                        values.append(
                            external.canonical(name, dist.kind, level, metric)
                        )
                scores[(name, dist.kind, metric)] = values
    return ladders, scores


def _score_ranges(cfg, scores):
    """Normalization ranges: per metric over the run, or per ladder."""
    ranges = {}
    if cfg.normalization == "run":
        for metric in cfg.metrics:
            pooled = []
            for (name, kind, m), values in scores.items():
                if m == metric:
                    pooled.extend(values)
            ranges[metric] = canonical_score_range(pooled)
    else:
        for (name, kind, metric), values in scores.items():
            ranges[(name, kind, metric)] = canonical_score_range(values)
    return ranges


def _range_for(cfg, ranges, name, kind, metric):
    return ranges[metric] if cfg.normalization == "run" else ranges[(name, kind, metric)]


def _cache_path(out_dir, digest, name, kind, distance):
    return out_dir / ".jndcache" / digest[:16] / f"{name}_{kind}_d{distance:g}.csv"


def _load_jnd_cache(path, oracle):
    if not path.is_file():
        return
    try:
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            next(reader, None)
            for row in reader:
                i, j, value = int(row[0]), int(row[1]), row[2] == "true"
                oracle._cache[(i, j)] = value
    except (OSError, ValueError, IndexError):
        # A damaged cache only costs recomputation.
        oracle._cache.clear()


def _store_jnd_cache(path, oracle):
    path.parent.mkdir(parents=True, exist_ok=True)
    rows = [(i, j, verdict) for (i, j), verdict in sorted(oracle._cache.items())]
    _write_csv(path, ["i", "j", "distinguishable"], rows)


def _scan_units(cfg, ladders, scores, out_dir, digest, progress=True):
    """Run interval scans for every (content, distortion, distance) unit.

    Returns {(name, kind, distance, metric): [AmbiguityInterval, ...]}.
    Units are independent; the pairwise visibility verdicts inside one
    unit are cached on disk keyed by the configuration digest, so an
    interrupted run resumes without recomputing finished maps.
    """
    units = sorted((name, kind) for name, kind in ladders) if ladders else []
    tasks = [
        (name, kind, distance)
        for distance in cfg.distance_multiples
        for name, kind in units
    ]
    results = {}
    done = 0

    def scan(task):
        name, kind, distance = task
        ladder = ladders[(name, kind)]
        vc = replace(cfg.display, distance_multiple=distance)
        oracle = LadderJndOracle(ladder.images, vc, cfg.vdp, cfg.k)
        cache_file = _cache_path(out_dir, digest, name, kind, distance)
        _load_jnd_cache(cache_file, oracle)
        out = {}
        for metric in cfg.metrics:
            out[metric] = ambiguity_intervals(scores[(name, kind, metric)], oracle)
        _store_jnd_cache(cache_file, oracle)
        return task, out

    if cfg.jobs > 1:
        with ThreadPoolExecutor(max_workers=cfg.jobs) as pool:
            outcomes = list(pool.map(scan, tasks))
    else:
        outcomes = [scan(task) for task in tasks]
    for task, out in outcomes:
        name, kind, distance = task
        done += 1
        if progress:
            print(
                f"[{done}/{len(tasks)}] scanned {name} {kind} at {distance:g}H",
                file=sys.stderr,
            )
        for metric, intervals in out.items():
            results[(name, kind, distance, metric)] = intervals
    return results


_INTERVAL_HEADER = [
    "content",
    "distortion",
    "metric",
    "level",
    "score",
    "lower_width",
    "upper_width",
    "lower_censored",
    "upper_censored",
]

_SUMMARY_HEADER = ["metric", "distortion", "mean", "max", "std", "n", "range_min", "range_max"]


def _write_interval_outputs(cfg, contents, ladders, scores, results, out_dir, digest):
    names = sorted(name for name, _ in contents)
    kinds = [d.kind for d in cfg.distortions]
    ranges = _score_ranges(cfg, scores)
    written = []
    for distance in cfg.distance_multiples:
        for metric in cfg.metrics:
            for kind in kinds:
                rows = []
                for name in names:
                    for iv in results[(name, kind, distance, metric)]:
                        rows.append(
                            [
                                name,
                                kind,
                                metric,
                                iv.rung,
                                iv.score,
                                iv.lower_width,
                                iv.upper_width,
                                iv.lower_censored,
                                iv.upper_censored,
                            ]
                        )
                path = out_dir / f"intervals_{metric}_{kind}_d{distance:g}.csv"
                _write_csv(path, _INTERVAL_HEADER, rows)
                _write_sidecar(path, digest)
                written.append(path)
        summary_rows = []
        side_rows = []
        for metric in sorted(cfg.metrics):
            for kind in sorted(kinds):
                pooled = []
                hull_lo, hull_hi = math.inf, -math.inf
                for name in names:
                    rng = _range_for(cfg, ranges, name, kind, metric)
                    hull_lo, hull_hi = min(hull_lo, rng[0]), max(hull_hi, rng[1])
                    intervals = results[(name, kind, distance, metric)]
                    pooled.extend(pooled_widths(intervals, rng))
                    sides = side_statistics(intervals, rng)
                    for side in ("lower", "upper"):
                        mean_w, max_w, std_w, count = sides[side]
                        side_rows.append([metric, kind, name, side, mean_w, max_w, std_w, count])
                summary = summarize_widths(metric, kind, names, pooled, (hull_lo, hull_hi))
                summary_rows.append(
                    [
                        summary.metric,
                        summary.distortion,
                        summary.mean_width,
                        summary.max_width,
                        summary.std_width,
                        summary.sample_count,
                        summary.normalization_range[0],
                        summary.normalization_range[1],
                    ]
                )
        path = out_dir / f"summary_d{distance:g}.csv"
        _write_csv(path, _SUMMARY_HEADER, summary_rows)
        _write_sidecar(path, digest)
        written.append(path)
        path = out_dir / f"summary_sides_d{distance:g}.csv"
        _write_csv(
            path,
            ["metric", "distortion", "content", "side", "mean", "max", "std", "n"],
            side_rows,
        )
        _write_sidecar(path, digest)
        written.append(path)
    return written


def cmd_ladder(cfg):
    out_dir = Path(cfg.output)
    out_dir.mkdir(parents=True, exist_ok=True)
    digest = config_digest(cfg)
    contents = _load_contents(cfg)
    ladder_dir = out_dir / "ladders"
    rows = []
    for name, src in contents:
        for dist in cfg.distortions:
            ladder = build_ladder(src, dist, cfg.levels, cfg.seed, content_name=name)
            for row in export_ladder(ladder, ladder_dir, "pgm"):
                row["file"] = f"ladders/{row['file']}"
                rows.append(row)
    manifest = out_dir / "manifest.csv"
    write_manifest(rows, manifest)
    _write_sidecar(manifest, digest)
    print(f"wrote {len(rows)} rungs and {manifest}")
    return 0


def cmd_intervals(cfg):
    out_dir = Path(cfg.output)
    out_dir.mkdir(parents=True, exist_ok=True)
    digest = config_digest(cfg)
    contents = _load_contents(cfg)
    external = _merge_score_tables(cfg.score_files)
    ladders, scores = _score_ladders(cfg, contents, external)
    results = _scan_units(cfg, ladders, scores, out_dir, digest)
    written = _write_interval_outputs(cfg, contents, ladders, scores, results, out_dir, digest)
    print(f"wrote {len(written)} files under {out_dir}")
    return 0


def cmd_benchmark(cfg, subjective_path):
    if not Path(subjective_path).is_file():
        raise ValidationError(f"subjective file not found: {subjective_path}")
    out_dir = Path(cfg.output)
    out_dir.mkdir(parents=True, exist_ok=True)
    digest = config_digest(cfg)
    contents = _load_contents(cfg)
    external = _merge_score_tables(cfg.score_files)
    ladders, scores = _score_ladders(cfg, contents, external)
    ratings = ingest_subjective(subjective_path)

    # Accuracy statistics use every computed score; interval widths come
    # from scans at the first configured distance.
    entries = dict(external.entries)
    for (name, kind, metric), values in scores.items():
        if metric not in BUILTIN_METRICS:
            continue
        desc = BUILTIN_METRICS[metric]
        for level, canonical in enumerate(values, start=1):
            # The polarity flip is an involution, so applying it to a
            # canonical score restores the native value the table stores.
            entries[(name, kind, level, metric)] = desc.canonical(canonical)
    table = ScoreTable(entries=entries, descriptors=dict(external.descriptors))

    first_distance = cfg.distance_multiples[0]
    scan_cfg = replace(cfg, distance_multiples=(first_distance,))
    results = _scan_units(scan_cfg, ladders, scores, out_dir, digest)
    ranges = _score_ranges(cfg, scores)
    widths = {}
    for metric in cfg.metrics:
        for dist in cfg.distortions:
            pooled = []
            for name, _ in contents:
                rng = _range_for(cfg, ranges, name, dist.kind, metric)
                pooled.extend(
                    pooled_widths(results[(name, dist.kind, first_distance, metric)], rng)
                )
            widths[(metric, dist.kind)] = pooled

    report = benchmark(table, ratings, widths, alpha=0.01)

    acc_rows = [
        [
            row.metric,
            row.distortion,
            row.sample_count,
            row.plcc,
            row.srocc,
            row.rmse,
            row.fit.beta[0],
            row.fit.beta[1],
            row.fit.beta[2],
            row.fit.beta[3],
            row.fit.rmse,
            row.fit.converged,
            row.fisher_p,
            row.top_group,
        ]
        for row in report.accuracy
    ]
    path = out_dir / "accuracy.csv"
    _write_csv(
        path,
        [
            "metric",
            "distortion",
            "n",
            "plcc",
            "srocc",
            "rmse",
            "beta1",
            "beta2",
            "beta3",
            "beta4",
            "fit_rmse",
            "converged",
            "fisher_p",
            "top_group",
        ],
        acc_rows,
    )
    _write_sidecar(path, digest)

    test_rows = [
        [t.metric_a, t.metric_b, t.distortion, t.u_statistic, t.p_value, t.significant]
        for t in report.width_tests
    ]
    path = out_dir / "width_tests.csv"
    _write_csv(
        path, ["metric_a", "metric_b", "distortion", "u", "p_value", "significant"], test_rows
    )
    _write_sidecar(path, digest)

    gap_rows = [
        [metric, distortion, count]
        for (metric, distortion), count in sorted(report.coverage_gaps.items())
    ]
    path = out_dir / "coverage_gaps.csv"
    _write_csv(path, ["metric", "distortion", "missing"], gap_rows)
    _write_sidecar(path, digest)

    by_distortion = {}
    for row in report.accuracy:
        by_distortion.setdefault(row.distortion, []).append(row)
    for distortion, rows in sorted(by_distortion.items()):
        chart_entries = []
        for row in rows:
            pooled = widths.get((row.metric, distortion), [])
            mean_width = float(np.mean(pooled)) if len(pooled) else 0.0
            chart_entries.append((row.metric, row.plcc, mean_width, row.top_group))
        svg = accuracy_ambiguity_chart(
            chart_entries, f"{distortion}: accuracy and ambiguity ({first_distance:g}H)"
        )
        path = out_dir / f"benchmark_{distortion}.svg"
        path.write_text(svg)
        _write_sidecar(path, digest)
    print(f"benchmark written under {out_dir}")
    return 0


def cmd_vdpmap(cfg, reference, test):
    for path in (reference, test):
        if not Path(path).is_file():
            raise ValidationError(f"input image not found: {path}")
    ref = to_grayscale(load_image(reference))
    tst = to_grayscale(load_image(test))
    if ref.data.shape != tst.data.shape:
        raise ValidationError(
            f"image dimensions differ: {ref.data.shape} vs {tst.data.shape}"
        )
    out_dir = Path(cfg.output)
    out_dir.mkdir(parents=True, exist_ok=True)
    digest = config_digest(cfg)
    pmap = vdp(
        display_model(ref, cfg.display), display_model(tst, cfg.display), cfg.display, cfg.vdp
    )
    png = out_dir / "vdpmap.png"
    save_image(png, PixelImage(np.clip(np.rint(pmap.data * 255.0), 0, 255).astype(np.uint8)))
    _write_sidecar(png, digest)
    mean_p, max_p, fraction = map_summary(pmap)
    path = out_dir / "vdpmap.csv"
    _write_csv(path, ["mean", "max", "fraction_above_half"], [[mean_p, max_p, fraction]])
    _write_sidecar(path, digest)
    print(f"mean={_fmt(mean_p)} max={_fmt(max_p)} fraction_above_half={_fmt(fraction)}")
    return 0


def _apply_overrides(cfg, args):
    updates = {}
    if args.out is not None:
        updates["output"] = args.out
    if args.jobs is not None:
        updates["jobs"] = args.jobs
    if args.k is not None:
        updates["k"] = args.k
    if getattr(args, "distance", None):
        updates["distance_multiples"] = tuple(args.distance)
    return replace(cfg, **updates) if updates else cfg


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="INI run configuration (defaults are built in)")
    common.add_argument("--out", help="output directory (overrides the configuration)")
    common.add_argument("--jobs", type=int, help="parallel scan workers")
    common.add_argument("--k", type=float, help="visibility proportion threshold")
    common.add_argument(
        "--distance",
        type=float,
        action="append",
        help="distance multiple; repeat the flag to sweep several",
    )
    parser = argparse.ArgumentParser(
        prog="iqambig",
        description="Ambiguity intervals of image quality metrics under a visual difference predictor",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("ladder", parents=[common], help="export distortion ladders")
    sub.add_parser("intervals", parents=[common], help="run the ambiguity interval experiment")
    bench = sub.add_parser("benchmark", parents=[common], help="metric accuracy statistics")
    bench.add_argument("--subjective", required=True, help="subjective rating CSV")
    vmap = sub.add_parser("vdpmap", parents=[common], help="perceivableness map of an image pair")
    vmap.add_argument("reference")
    vmap.add_argument("test")
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code in (0, None) else 1
    try:
        cfg = parse_config(args.config) if args.config else default_config()
        cfg = _apply_overrides(cfg, args)
        validate_config(cfg)
        if args.command == "ladder":
            return cmd_ladder(cfg)
        if args.command == "intervals":
            return cmd_intervals(cfg)
        if args.command == "benchmark":
            return cmd_benchmark(cfg, args.subjective)
        return cmd_vdpmap(cfg, args.reference, args.test)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # runtime failure
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
