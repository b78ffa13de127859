# -*- coding: utf-8 -*-
"""
vprkit
======

Command-line entry point.

    encode     encode one image, write the descriptor
    bench      one (technique, resolution) measurement as a CSV row
    sweep      techniques x resolutions over one or more datasets
    synth      write a synthetic dataset
    footprint  dataset size per resolution
    resize     write a resized copy of a dataset
    keypoints  ORB keypoint counts per resolution
    plot       figure tables (and PNGs) from an existing sweep CSV
    config     show or change saved preferences

Exit codes: 0 success (NO_KEYPOINTS included), 2 usage or input error,
3 encoder or internal error.
"""
import argparse
import dataclasses
import os
import sys
import time

from bench_config import BenchConfig, UserPreferences, log, resolve_seed
from datasets import dataset_footprint, export_resized, load_images, load_manifest, synth_dataset
from descriptors import EncoderParams, encode, parse_overrides
from descriptors.codec import save_descriptor
from evaluation import (SweepConfig, evaluate, format_records_csv, keypoint_census, load_originals,
                        peak_resolutions, read_records_csv, sweep, write_records_csv)
from imaging import CANONICAL_LADDER, Resolution, load_image, parse_resolutions, resize
from plot_data import render_figures, write_plot_tables
from vpr_errors import (ConfigError, DescriptorFormatError, GroundTruthError, ImageFormatError, ImageIoError,
                        LayoutError, NoKeypoints, VprError)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_INTERNAL = 3

INPUT_ERRORS = (ImageIoError, ImageFormatError, LayoutError, GroundTruthError, ConfigError, DescriptorFormatError)

NO_KEYPOINTS_LINE = 'NO_KEYPOINTS'


# ==================== Argument types ====================

def _resolution(text):
    try:
        return Resolution.parse(text)
    except ConfigError as e:
        raise argparse.ArgumentTypeError(str(e)) from None


def _resolution_list(text):
    try:
        return parse_resolutions(text)
    except ConfigError as e:
        raise argparse.ArgumentTypeError(str(e)) from None


def _technique_list(text):
    techniques = [t.strip() for t in text.split(',') if t.strip()]
    unknown = [t for t in techniques if t not in BenchConfig.TECHNIQUES]
    if not techniques or unknown:
        raise argparse.ArgumentTypeError(
            f"invalid technique list {text!r}; choose from {', '.join(BenchConfig.TECHNIQUES)}")
    return techniques


def _technique_params(technique: str, items):
    return EncoderParams().for_technique(technique).with_overrides(parse_overrides(items))


def _sweep_params(items) -> EncoderParams:
    """technique.key=value items -> EncoderParams."""
    grouped = {}
    for key, value in parse_overrides(items).items():
        technique, dot, name = key.partition('.')
        if not dot or technique not in BenchConfig.TECHNIQUES:
            raise ConfigError(f"sweep parameters take the form <technique>.<key>=<value>, got {key!r}")
        grouped.setdefault(technique, {})[name] = value
    params = EncoderParams()
    for technique, overrides in grouped.items():
        params = dataclasses.replace(params, **{technique: params.for_technique(technique).with_overrides(overrides)})
    return params


def _dataset_root(args) -> str:
    root = args.dataset or UserPreferences.get('last_dataset')
    if not root:
        raise ConfigError("no --dataset given and no previous dataset saved")
    return root


def _remember_dataset(root: str):
    UserPreferences.set('last_dataset', os.path.abspath(root))
    UserPreferences.save()


# ==================== Commands ====================

def cmd_encode(args) -> int:
    params = _technique_params(args.technique, args.params)
    image = load_image(args.input)
    if args.resolution is not None:
        image = resize(image, args.resolution)

    start = time.perf_counter()
    try:
        descriptor = encode(image, args.technique, params)
    except NoKeypoints as e:
        print(NO_KEYPOINTS_LINE)
        log("vprkit", f"{args.input}: {e.reason}")
        return EXIT_OK
    elapsed_ms = (time.perf_counter() - start) * 1000.0

    if args.out:
        save_descriptor(descriptor, args.out)
        log("vprkit", f"Wrote {descriptor.kind} descriptor ({len(descriptor)} entries) to {args.out}")
    print(f"encode_ms={BenchConfig.TIME_MS_FORMAT.format(elapsed_ms)}")
    return EXIT_OK


def cmd_bench(args) -> int:
    root = _dataset_root(args)
    manifest = load_manifest(root)
    config = SweepConfig.from_preferences(
        timing_repetitions=args.reps, hamming_threshold=args.hamming_threshold, gt_tolerance=args.tolerance)
    record = evaluate(manifest, args.technique, args.resolution, _technique_params(args.technique, args.params),
                      config.timing_repetitions, config.hamming_threshold, config.gt_tolerance)
    sys.stdout.write(format_records_csv([record], header=args.header))
    _remember_dataset(root)
    return EXIT_OK


def cmd_sweep(args) -> int:
    roots = args.dataset or [_dataset_root(args)]
    config = SweepConfig.from_preferences(
        resolutions=args.resolutions, techniques=args.techniques, timing_repetitions=args.reps,
        output=args.out, params=_sweep_params(args.params), hamming_threshold=args.hamming_threshold,
        gt_tolerance=args.tolerance, jobs=args.jobs)

    # every dataset must load and decode before any encoding starts
    manifests = [load_manifest(root) for root in roots]
    names = [m.name for m in manifests]
    if len(set(names)) != len(names):
        raise ConfigError(f"dataset names must be unique, got {', '.join(names)}")
    originals = [load_originals(manifest) for manifest in manifests]
    log("Sweep", f"Decoded {sum(m.n_query + m.n_reference for m in manifests)} images from {len(manifests)} dataset(s)")

    records = []
    for manifest, images in zip(manifests, originals):
        records.extend(sweep(manifest, config, images))

    if config.output:
        write_records_csv(records, config.output)
    else:
        sys.stdout.write(format_records_csv(records))
    if args.plot_data:
        write_plot_tables(records, args.plot_data)
        if args.render:
            render_figures(args.plot_data)

    for peak in peak_resolutions(records).values():
        ratio_at = peak.ratio_resolution.label if peak.ratio_resolution else 'n/a'
        log("Sweep", f"{peak.technique}: best weighted accuracy {peak.accuracy:.3f} at "
                     f"{peak.accuracy_resolution.label}, best ratio at {ratio_at}")
    _remember_dataset(roots[-1])
    return EXIT_OK


def cmd_synth(args) -> int:
    seed = resolve_seed(args.seed)
    manifest = synth_dataset(args.out, args.n, args.side, seed, args.distractors, perturb=not args.identical)
    print(f"{manifest.name},{manifest.n_query},{manifest.n_reference}")
    return EXIT_OK


def cmd_footprint(args) -> int:
    manifest = load_manifest(_dataset_root(args))
    print('dataset,resolution,megabytes')
    for resolution in sorted(args.resolutions):
        size = dataset_footprint(manifest, resolution)
        print(f"{manifest.name},{resolution.label},{size / 1e6:.3f}")
    return EXIT_OK


def cmd_resize(args) -> int:
    manifest = load_manifest(_dataset_root(args))
    exported = export_resized(manifest, args.resolution, args.out)
    print(f"{exported.name},{exported.n_query},{exported.n_reference}")
    return EXIT_OK


def cmd_keypoints(args) -> int:
    params = _technique_params('orb', args.params)
    census = keypoint_census(load_images(args.input), args.resolutions, params)
    print('resolution,image,keypoints')
    for resolution, counts in census.items():
        for path, count in zip(args.input, counts):
            print(f"{resolution.label},{os.path.basename(path)},{count}")
    return EXIT_OK


def cmd_plot(args) -> int:
    records = read_records_csv(args.csv)
    write_plot_tables(records, args.plot_data)
    if args.render:
        render_figures(args.plot_data)
    return EXIT_OK


def cmd_config(args) -> int:
    if args.reset:
        UserPreferences.restore_defaults()
    for key, value in parse_overrides(args.set).items():
        if key not in UserPreferences.DEFAULT_PREFS:
            raise ConfigError(f"unknown preference {key!r}")
        default = UserPreferences.DEFAULT_PREFS[key]
        if isinstance(default, list):
            parsed = [int(v) if isinstance(default[0], int) else v for v in value.split(',') if v.strip()]
        elif isinstance(default, int):
            try:
                parsed = int(value)
            except ValueError:
                raise ConfigError(f"{key} needs an integer, got {value!r}") from None
        else:
            parsed = value
        UserPreferences.set(key, parsed)
    if args.set:
        UserPreferences.save()
    print(f"# {UserPreferences.get_config_path()}")
    for key, value in UserPreferences.get_all().items():
        print(f"{key}={value}")
    return EXIT_OK


# ==================== Parser ====================

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog='vprkit', description='Handcrafted VPR pipelines and resolution benchmark')
    sub = parser.add_subparsers(dest='command', required=True)

    p = sub.add_parser('encode', help='encode one image')
    p.add_argument('--technique', required=True, choices=BenchConfig.TECHNIQUES)
    p.add_argument('--input', required=True, help='PNG or JPEG image')
    p.add_argument('--resolution', type=_resolution, help='resize to <side>x<side> first')
    p.add_argument('--params', nargs='*', default=[], metavar='KEY=VALUE', help='encoder parameter overrides')
    p.add_argument('--out', help='descriptor file (.json for the JSON form)')
    p.set_defaults(func=cmd_encode)

    p = sub.add_parser('bench', help='evaluate one technique at one resolution')
    p.add_argument('--dataset', help='dataset root (default: last used)')
    p.add_argument('--technique', required=True, choices=BenchConfig.TECHNIQUES)
    p.add_argument('--resolution', required=True, type=_resolution)
    p.add_argument('--reps', type=int, help='timing repetitions (median reported)')
    p.add_argument('--params', nargs='*', default=[], metavar='KEY=VALUE')
    p.add_argument('--hamming-threshold', type=int)
    p.add_argument('--tolerance', type=int, help='ground-truth tolerance radius in frames')
    p.add_argument('--header', action='store_true', help='print the CSV header too')
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser('sweep', help='full resolution sweep')
    p.add_argument('--dataset', action='append', help='dataset root; repeat for several')
    p.add_argument('--techniques', type=_technique_list)
    p.add_argument('--resolutions', type=_resolution_list)
    p.add_argument('--reps', type=int)
    p.add_argument('--params', nargs='*', default=[], metavar='TECHNIQUE.KEY=VALUE')
    p.add_argument('--hamming-threshold', type=int)
    p.add_argument('--tolerance', type=int)
    p.add_argument('--jobs', type=int,
                   help='worker threads; only resizing overlaps, timed encode and match run one cell at a time')
    p.add_argument('--out', help='CSV path (default: stdout)')
    p.add_argument('--plot-data', help='directory for the per-figure tables')
    p.add_argument('--render', action='store_true', help='also render the tables to PNG')
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser('synth', help='write a synthetic dataset')
    p.add_argument('--n', type=int, default=BenchConfig.SYNTH_N)
    p.add_argument('--side', type=int, default=BenchConfig.SYNTH_SIDE)
    p.add_argument('--seed', type=int, default=BenchConfig.SYNTH_SEED)
    p.add_argument('--distractors', type=int, default=BenchConfig.SYNTH_DISTRACTORS)
    p.add_argument('--identical', action='store_true', help='references byte-identical to queries')
    p.add_argument('--out', required=True)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser('footprint', help='dataset size per resolution')
    p.add_argument('--dataset')
    p.add_argument('--resolutions', type=_resolution_list, default=list(CANONICAL_LADDER))
    p.set_defaults(func=cmd_footprint)

    p = sub.add_parser('resize', help='write a resized copy of a dataset')
    p.add_argument('--dataset')
    p.add_argument('--resolution', required=True, type=_resolution)
    p.add_argument('--out', required=True)
    p.set_defaults(func=cmd_resize)

    p = sub.add_parser('keypoints', help='ORB keypoint counts per resolution')
    p.add_argument('--input', required=True, nargs='+')
    p.add_argument('--resolutions', type=_resolution_list, default=list(CANONICAL_LADDER))
    p.add_argument('--params', nargs='*', default=[], metavar='KEY=VALUE')
    p.set_defaults(func=cmd_keypoints)

    p = sub.add_parser('plot', help='figure tables from a sweep CSV')
    p.add_argument('--csv', required=True)
    p.add_argument('--plot-data', required=True)
    p.add_argument('--render', action='store_true')
    p.set_defaults(func=cmd_plot)

    p = sub.add_parser('config', help='show or change saved preferences')
    p.add_argument('--set', nargs='*', default=[], metavar='KEY=VALUE')
    p.add_argument('--reset', action='store_true')
    p.set_defaults(func=cmd_config)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else EXIT_USAGE

    try:
        return args.func(args)
    except INPUT_ERRORS as e:
        log("vprkit", f"error: {e}")
        return EXIT_USAGE
    except VprError as e:
        log("vprkit", f"{type(e).__name__}: {e}")
        return EXIT_INTERNAL
    except Exception as e:
        log("vprkit", f"internal error: {type(e).__name__}: {e}")
        return EXIT_INTERNAL


if __name__ == '__main__':
    sys.exit(main())
