#!/usr/bin/env python3
# -*- coding: utf-8 -*-

import csv
import json
import logging
import os
import subprocess
import sys
import time
from argparse import ArgumentParser

# config picks its profile at import time, so the environment has to be
# set before any fpsketch module is imported.
os.environ.setdefault('FPSKETCH_ENV', 'dev')

import battery
import bench
import config
import core
import fphh
import generators
import oracle
import prg
import streamfile
import version
from codec import CodecException
from fphh import FpHH
from oracle import OracleException
from pipeline import AllInstancesFailed, FpEstimator
from streamfile import StreamFormatException

log = logging.getLogger('fpsketch')

EXIT_OK = 0
EXIT_PARSE = 2
EXIT_ALL_FAILED = 3


def emit(rows, out, columns=None):
    """Write a list of flat dicts to stdout as text, csv or json."""
    if out == 'json':
        print(json.dumps(rows if len(rows) != 1 else rows[0], sort_keys=True))
        return
    if not rows:
        return
    columns = columns or sorted(rows[0])
    if out == 'csv':
        writer = csv.DictWriter(sys.stdout, fieldnames=columns,
                                extrasaction='ignore')
        writer.writeheader()
        writer.writerows(rows)
    else:
        for row in rows:
            print(' '.join('{}={}'.format(c, row.get(c)) for c in columns))


def parse_overrides(pairs):
    overrides = {}
    for pair in pairs or []:
        key, sep, value = pair.partition('=')
        if not sep:
            raise core.ConfigException(
                "--set expects key=value, got {!r}".format(pair))
        overrides[key.strip()] = core.parse_value(key.strip(), value.strip())
    return overrides


def estimate(args):
    stream = streamfile.read_stream(args.stream, args.format)
    h = stream.header
    cfg = core.derive_config(args.p, args.eps, args.delta, h.n, max(h.m, 1),
                             h.M, parse_overrides(args.set))
    started = time.time()
    est = FpEstimator(cfg, args.seed, args.instances)
    est.update_many(stream.indices, stream.deltas)
    ingested = time.time()
    record = est.query()
    finished = time.time()
    row = dict(record._asdict())
    row['ingest_seconds'] = ingested - started
    row['query_seconds'] = finished - ingested
    if h.n <= config.ORACLE_MAX_N:
        x = oracle.materialize(stream.indices, stream.deltas, h.n)
        exact = oracle.exact_fp(x, args.p)
        row['relative_error'] = oracle.relative_error(record.estimate, exact)
    if args.out == 'text':
        print(repr(record.estimate))
    emit([row], args.out)
    return EXIT_OK


def run_oracle(args):
    stream = streamfile.read_stream(args.stream, args.format)
    result = oracle.run_oracle(stream.indices, stream.deltas, stream.header.n,
                               args.p, args.phi)
    heavy = ' '.join('{}{}'.format(w, '+' if s > 0 else '-')
                     for w, s in result.heavy)
    emit([{'fp': result.fp, 'heavy': heavy}], args.out, ['fp', 'heavy'])
    return EXIT_OK


def find_heavy(args):
    stream = streamfile.read_stream(args.stream, args.format)
    h = stream.header
    cfg = core.derive_config(args.p, args.eps, args.delta, h.n, max(h.m, 1),
                             h.M, parse_overrides(args.set))
    indices, deltas = core.check_updates(stream.indices, stream.deltas,
                                         h.n, h.M)
    finder = FpHH.from_config(cfg, prg.CounterPRG(args.seed, 'heavy'),
                              phi=args.phi, universe=h.n)
    finder.update_many(*core.coalesce_updates(indices, deltas))
    records = finder.report()
    log.info("%d heavy hitters at phi=%g", len(records), args.phi)
    if args.out == 'text':
        for line in fphh.format_records(records):
            print(line)
    else:
        emit([dict(rec._asdict()) for rec in records], args.out,
             ['index', 'sign', 'mag_p'])
    return EXIT_OK


def run_bench(args):
    rows = bench.bench_sweep(args.eps or [], p=args.p, n=args.n,
                             m=args.updates, seed=args.seed,
                             modes=args.modes)
    emit(rows, args.out if args.out != 'text' else 'csv', bench.COLUMNS)
    for mode in args.modes:
        exponent = bench.fit_exponent(rows, mode)
        if exponent is not None:
            log.info("%s: latency ~ (1/eps)^%.2f", mode, exponent)
    return EXIT_OK


def generate(args):
    rng = prg.CounterPRG(args.seed, 'generate').numpy_rng()
    kwargs = {}
    if args.kind == 'zipf':
        kwargs['theta'] = args.theta
    elif args.kind == 'planted':
        kwargs.update(heavy=args.heavy, share=args.share)
    stream = generators.GENERATORS[args.kind](args.n, args.m, args.M, rng,
                                              **kwargs)
    if args.deletions:
        stream = generators.with_deletions(stream, args.deletions, rng)
    streamfile.write_stream(args.stream, stream, args.format or 'text')
    log.info("wrote %d updates to %s", len(stream), args.stream)
    return EXIT_OK


def convert(args):
    stream = streamfile.read_stream(args.stream)
    streamfile.write_stream(args.output, stream, args.format)
    return EXIT_OK


def show_config(args):
    cfg = core.derive_config(args.p, args.eps, args.delta, args.n, args.m,
                             args.M, parse_overrides(args.set))
    sys.stdout.write(cfg.to_text())
    print('config_hash={}'.format(cfg.config_hash))
    return EXIT_OK


def run_battery(args):
    params = {'p': args.p}
    if args.name == 'fphh':
        params.update(phi=args.phi, delta=args.delta)
    elif args.name == 'e2e':
        params.update(eps=args.eps, delta=args.delta,
                      instances=args.instances or 1)
    else:
        params['eps'] = args.eps
    if args.name == 'gme':
        params['kind'] = args.kind
    summary = battery.run_battery(args.name, args.trials, args.seed,
                                  use_queue=args.queue, **params)
    emit([summary], args.out)
    return EXIT_OK


def test_unit(args):
    """
    Runs the unit tests.
    """
    os.environ['FPSKETCH_ENV'] = 'test'
    return int(subprocess.call(["py.test", "--cov"],
                               cwd=config.FPSKETCH_ROOT))


def test(args):
    """
    Runs the unit tests and the Monte-Carlo acceptance batteries.
    """
    os.environ['FPSKETCH_ENV'] = 'test'
    test_cmds = [["py.test", "--cov"], "./test.sh"]
    return int(any([subprocess.call(cmd, cwd=config.FPSKETCH_ROOT)
                    for cmd in test_cmds]))


def _add_estimator_args(parser):
    parser.add_argument('--p', type=float, default=1.0)
    parser.add_argument('--eps', type=float, default=0.1)
    parser.add_argument('--delta', type=float, default=0.1)
    parser.add_argument('--seed', type=int, default=0)
    parser.add_argument('--set', action='append', metavar='KEY=VALUE',
                        help='Override a config constant or derived size')


def _add_out(parser, default='text'):
    parser.add_argument('--out', choices=('text', 'csv', 'json'),
                        default=default)


def get_args():
    parser = ArgumentParser(prog=__file__,
                            description='F_p sketches: estimate, verify and '
                                        'benchmark')
    parser.add_argument('--verbose', action='store_true')
    parser.add_argument('--version', action='version',
                        version=version.__version__)

    subparsers = parser.add_subparsers()

    estimate_subparser = subparsers.add_parser(
        'estimate', help='Estimate F_p of a stream file')
    estimate_subparser.add_argument('--stream', required=True)
    estimate_subparser.add_argument('--format', choices=streamfile.FORMATS)
    estimate_subparser.add_argument('--instances', type=int)
    _add_estimator_args(estimate_subparser)
    _add_out(estimate_subparser)
    estimate_subparser.set_defaults(func=estimate)

    oracle_subparser = subparsers.add_parser(
        'oracle', help='Exact F_p and heavy set of a stream file')
    oracle_subparser.add_argument('--stream', required=True)
    oracle_subparser.add_argument('--format', choices=streamfile.FORMATS)
    oracle_subparser.add_argument('--p', type=float, default=1.0)
    oracle_subparser.add_argument('--phi', type=float, default=0.1)
    _add_out(oracle_subparser)
    oracle_subparser.set_defaults(func=run_oracle)

    heavy_subparser = subparsers.add_parser(
        'heavy', help='Report the phi-heavy hitters of a stream file')
    heavy_subparser.add_argument('--stream', required=True)
    heavy_subparser.add_argument('--format', choices=streamfile.FORMATS)
    heavy_subparser.add_argument('--phi', type=float, default=0.1)
    _add_estimator_args(heavy_subparser)
    _add_out(heavy_subparser)
    heavy_subparser.set_defaults(func=find_heavy)

    bench_subparser = subparsers.add_parser(
        'bench', help='Per-update latency against eps')
    bench_subparser.add_argument('--eps', type=float, nargs='*',
                                 default=[0.2, 0.1, 0.05, 0.02])
    bench_subparser.add_argument('--p', type=float, default=1.0)
    bench_subparser.add_argument('--n', type=int, default=10000)
    bench_subparser.add_argument('--updates', type=int, default=2000)
    bench_subparser.add_argument('--seed', type=int, default=0)
    bench_subparser.add_argument('--modes', nargs='+', choices=bench.MODES,
                                 default=['light', 'light-unbuffered'])
    _add_out(bench_subparser, 'csv')
    bench_subparser.set_defaults(func=run_bench)

    generate_subparser = subparsers.add_parser(
        'generate', help='Write a synthetic stream file')
    generate_subparser.add_argument('--stream', required=True)
    generate_subparser.add_argument('--format', choices=streamfile.FORMATS)
    generate_subparser.add_argument('--kind', choices=sorted(
        generators.GENERATORS), default='zipf')
    generate_subparser.add_argument('--n', type=int, default=10000)
    generate_subparser.add_argument('--m', type=int, default=100000)
    generate_subparser.add_argument('--M', type=int, default=10)
    generate_subparser.add_argument('--theta', type=float, default=1.1)
    generate_subparser.add_argument('--heavy', type=int, default=5)
    generate_subparser.add_argument('--share', type=float, default=0.5)
    generate_subparser.add_argument('--deletions', type=float, default=0.0)
    generate_subparser.add_argument('--seed', type=int, default=0)
    generate_subparser.set_defaults(func=generate)

    convert_subparser = subparsers.add_parser(
        'convert', help='Convert a stream file between text and binary')
    convert_subparser.add_argument('--stream', required=True)
    convert_subparser.add_argument('--output', required=True)
    convert_subparser.add_argument('--format', choices=streamfile.FORMATS,
                                   required=True)
    convert_subparser.set_defaults(func=convert)

    config_subparser = subparsers.add_parser(
        'config', help='Print the derived config')
    _add_estimator_args(config_subparser)
    config_subparser.add_argument('--n', type=int, default=10000)
    config_subparser.add_argument('--m', type=int, default=100000)
    config_subparser.add_argument('--M', type=int, default=10)
    config_subparser.set_defaults(func=show_config)

    battery_subparser = subparsers.add_parser(
        'battery', help='Run a Monte-Carlo battery')
    battery_subparser.add_argument('--name', choices=sorted(
        battery.BATTERIES), required=True)
    battery_subparser.add_argument('--trials', type=int, default=100)
    battery_subparser.add_argument('--phi', type=float, default=0.05)
    battery_subparser.add_argument('--kind', default='zipf')
    battery_subparser.add_argument('--instances', type=int)
    battery_subparser.add_argument('--queue', action='store_true',
                                   help='Run trials on the rq worker queue')
    _add_estimator_args(battery_subparser)
    _add_out(battery_subparser, 'json')
    battery_subparser.set_defaults(func=run_battery)

    unit_test_subparser = subparsers.add_parser('unit-test',
                                                help='Run the unit tests')
    unit_test_subparser.set_defaults(func=test_unit)

    test_subparser = subparsers.add_parser('test',
                                           help='Run the full test suite')
    test_subparser.set_defaults(func=test)

    return parser


def main(argv=None):
    args = get_args().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO,
                        format='%(levelname)s %(name)s: %(message)s')
    if not hasattr(args, 'func'):
        get_args().print_usage()
        return EXIT_PARSE
    try:
        return args.func(args)
    except (StreamFormatException, core.ConfigException,
            core.UpdateException, CodecException, OracleException,
            IOError) as e:
        log.error("%s", e)
        return EXIT_PARSE
    except AllInstancesFailed as e:
        log.error("%s", e)
        return EXIT_ALL_FAILED


if __name__ == "__main__":  # pragma: no cover
    try:
        sys.exit(main())
    except KeyboardInterrupt:
        print()  # So our prompt appears on a nice new line
        sys.exit(1)
