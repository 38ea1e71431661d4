"""Command-line surface: parse, mm (model-matrix checkpointing), fit, bench.

All diagnostics go to standard error; primary output (re-serialized frames,
coefficient tables, benchmark reports) goes to standard output or the --out
path, so commands compose in pipelines.  Exit codes: 0 success, 1 input or
format error, 2 verification failure (--strict violations, benchmark frame
mismatch).  The environment variable CHUNK_TARGET_BYTES overrides the
default chunk size.
"""

from __future__ import annotations

import argparse
import os
import sys
import tempfile
import time
from dataclasses import replace
from functools import partial
from pathlib import Path

import numpy as np

from ._coerce import ColumnType
from .apply import ApplyConfig, chunk_apply
from .bench import SYNTHETIC_SCHEMA_LETTERS, run_bench, synthetic_csv
from .chunker import ChunkerConfig, iter_chunks
from .errors import (
    DimensionMismatch,
    MissingColumn,
    RowstreamError,
    SchemaError,
    StrictViolation,
)
from .frame import (
    ParseReport,
    Schema,
    infer_schema,
    parse_frame,
    parse_frame_with_header,
)
from .matrix import parse_matrix
from .model_matrix import (
    FactorTerm,
    NumericTerm,
    TermSpec,
    expand,
    normalize_hhmm_column,
    spec_names,
)
from .ols import DEFAULT_RANK_TOL, NormalEqAccumulator, merge, solve_ne
from .writer import (
    append_to_checkpoint,
    format_frame,
    format_matrix,
    read_sidecar,
    sidecar_path,
    write_sidecar,
)

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_VERIFY = 2

_LETTER_TYPES = {
    "l": ColumnType.LOGICAL,
    "i": ColumnType.INTEGER,
    "r": ColumnType.REAL,
    "c": ColumnType.CHARACTER,
    "b": ColumnType.BYTES,
    "x": ColumnType.COMPLEX,
    "t": ColumnType.TIMESTAMP,
    "s": ColumnType.SKIP,
}
_TYPE_LETTERS = {v: k for k, v in _LETTER_TYPES.items()}

_SCHEMA_HELP = (
    "comma-separated type letters: l=Logical, i=Integer, r=Real, "
    "c=Character, b=Bytes, x=Complex, t=Timestamp, s=Skip; "
    "or 'infer' to sample the leading records"
)


def _parse_types(text: str) -> tuple:
    tokens = text.split(",") if "," in text else list(text)
    types = []
    for token in tokens:
        token = token.strip()
        if token not in _LETTER_TYPES:
            raise SchemaError(f"unknown column type letter {token!r}")
        types.append(_LETTER_TYPES[token])
    return tuple(types)


def _sep_bytes(text: str) -> bytes:
    if text == "\\t":
        text = "\t"
    raw = text.encode("utf-8")
    if len(raw) != 1:
        raise SchemaError(f"separator must be a single byte, got {text!r}")
    return raw


def _default_chunker() -> ChunkerConfig:
    env = os.environ.get("CHUNK_TARGET_BYTES")
    if env:
        return ChunkerConfig(target_bytes=int(env))
    return ChunkerConfig()


def _drop_records(data: bytes, n: int):
    """Drop up to n leading records from a record-aligned buffer."""
    dropped = 0
    pos = 0
    size = len(data)
    while dropped < n and pos < size:
        j = data.find(b"\n", pos)
        if j == -1:
            return b"", dropped + 1  # unterminated final record
        dropped += 1
        pos = j + 1
    return data[pos:], dropped


def _parse_stream(path, schema_arg, sep, header, skip, strict, cfg):
    """Stream a file as parsed frames: yields (schema, frame, report).

    The first data-bearing chunk resolves the schema — skipping leading
    records, consuming the header, and running inference when asked — and
    later chunks reuse it.
    """
    remaining_skip = skip
    schema = None
    for chunk in iter_chunks(path, cfg):
        data = chunk.data
        if schema is not None:
            frame, report = parse_frame(data, schema, strict=strict)
            yield schema, frame, report
            continue
        if remaining_skip:
            data, dropped = _drop_records(data, remaining_skip)
            remaining_skip -= dropped
        if not data:
            continue
        if schema_arg == "infer":
            sample = data
            if header:
                j = sample.find(b"\n")
                sample = sample[j + 1:] if j != -1 else b""
            if not sample:
                raise SchemaError(
                    "first chunk holds no data records to infer from; "
                    "pass an explicit schema"
                )
            types = infer_schema(sample, field_sep=sep).types
        else:
            types = _parse_types(schema_arg)
        schema = Schema(types, field_sep=sep)
        if header:
            frame, report = parse_frame_with_header(data, schema, strict=strict)
        else:
            frame, report = parse_frame(data, schema, strict=strict)
        schema = replace(schema, names=tuple(frame.names))
        yield schema, frame, report


def cmd_parse(args) -> int:
    cfg = _default_chunker()
    sep = _sep_bytes(args.sep)
    n_bytes = os.path.getsize(args.input)
    started = time.perf_counter()
    total = ParseReport()
    schema = None
    first = True
    sink = sys.stdout.buffer if args.out == "-" else open(args.out, "wb")
    try:
        for schema, frame, report in _parse_stream(
            args.input, args.schema, sep, args.header, args.skip,
            args.strict, cfg,
        ):
            sink.write(
                format_frame(frame, sep, include_header=args.header and first)
            )
            first = False
            total = total.merge(report)
        sink.flush()
    finally:
        if sink is not sys.stdout.buffer:
            sink.close()
    elapsed = time.perf_counter() - started
    err = sys.stderr
    if args.schema == "infer" and schema is not None:
        letters = ",".join(_TYPE_LETTERS[t] for t in schema.types)
        print(f"inferred schema: {letters}", file=err)
    print(f"rows: {total.n_records}", file=err)
    fails = " ".join(f"{k}={v}" for k, v in total.column_failures.items() if v)
    print(f"coercion failures: {fails or 'none'}", file=err)
    print(f"short rows: {total.short_rows}, long rows: {total.long_rows}",
          file=err)
    print(f"throughput: {n_bytes / 1e6 / max(elapsed, 1e-9):.1f} MB/s",
          file=err)
    return EXIT_OK


class _TermAction(argparse.Action):
    """Collect --numeric/--factor/--hhmm flags into one ordered list, so the
    checkpoint's column order is exactly the command line's term order."""

    def __call__(self, parser, namespace, values, option_string=None):
        terms = getattr(namespace, "terms", None)
        if terms is None:
            terms = []
            namespace.terms = terms
        terms.append((option_string.lstrip("-"), values))


def _build_terms(raw):
    terms = []
    hhmm_cols = []
    for kind, value in raw:
        if kind == "factor":
            column, eq, levels = value.partition("=")
            if not eq or not levels or not column:
                raise SchemaError(
                    f"--factor expects COL=LEVEL1,LEVEL2,..., got {value!r}"
                )
            terms.append(FactorTerm(column, tuple(levels.split(","))))
            continue
        for column in value.split(","):
            if not column:
                raise SchemaError(f"empty column name in --{kind} {value!r}")
            terms.append(NumericTerm(column))
            if kind == "hhmm":
                hhmm_cols.append(column)
    return terms, hhmm_cols


def cmd_mm(args) -> int:
    cfg = _default_chunker()
    sep = _sep_bytes(args.sep)
    terms, hhmm_cols = _build_terms(getattr(args, "terms", None) or [])
    if not terms:
        raise SchemaError(
            "no model terms; give at least one --numeric/--factor/--hhmm"
        )
    spec = TermSpec(response=args.response, terms=tuple(terms))
    names = spec_names(spec)
    out = Path(args.out)
    if sidecar_path(out).exists():
        existing = read_sidecar(out)
        if existing != names:
            raise SchemaError(
                f"existing sidecar for {out} lists different columns; "
                "refusing to append a mismatched matrix"
            )
    marker = Path(str(out) + ".partial")
    marker.touch()
    write_sidecar(out, names)
    err = sys.stderr
    with open(out, "ab") as sink:
        for path in args.inputs:
            n_input = n_rows = n_null = n_unknown = 0
            for _, frame, _report in _parse_stream(
                path, args.schema, sep, args.header, args.skip, False, cfg
            ):
                for column in hhmm_cols:
                    frame = normalize_hhmm_column(frame, column)
                matrix, xreport = expand(frame, spec, lenient_levels=True)
                if matrix.col_names != names:
                    raise SchemaError("checkpoint columns changed mid-stream")
                append_to_checkpoint(sink, format_matrix(matrix, b","))
                n_input += xreport.n_input
                n_rows += xreport.n_rows
                n_null += xreport.n_dropped_null
                n_unknown += xreport.n_dropped_unknown
            print(
                f"{path}: {n_input} rows in, {n_rows} written, "
                f"{n_null} dropped (null), {n_unknown} dropped (unknown level)",
                file=err,
            )
    marker.unlink()
    return EXIT_OK


def _fit_chunk(data: bytes, n_cols: int, resp_idx: int):
    matrix, failures = parse_matrix(data, ColumnType.REAL)
    values = matrix.values
    if matrix.n_rows == 0:
        d = n_cols - 1
        return np.zeros((d, d)), np.zeros(d), 0, failures
    if matrix.n_cols != n_cols:
        raise DimensionMismatch(
            f"checkpoint chunk has {matrix.n_cols} columns, "
            f"sidecar lists {n_cols}"
        )
    y = values[:, resp_idx]
    X = np.delete(values, resp_idx, axis=1)
    return X.T @ X, X.T @ y, values.shape[0], failures


def cmd_fit(args) -> int:
    names = read_sidecar(args.checkpoint)
    if args.response not in names:
        raise MissingColumn(
            f"response {args.response!r} not in {sidecar_path(args.checkpoint)}"
        )
    resp_idx = names.index(args.response)
    x_names = names[:resp_idx] + names[resp_idx + 1:]
    mode = {"seq": "sequential", "pipeline": "pipeline", "split": "split"}[args.mode]
    cfg = ApplyConfig(mode=mode, parallel=args.parallel,
                      chunker=_default_chunker())
    started = time.perf_counter()
    pieces = chunk_apply(
        args.checkpoint,
        partial(_fit_chunk, n_cols=len(names), resp_idx=resp_idx),
        cfg,
    )
    acc = NormalEqAccumulator.zero(len(x_names))
    failures = 0
    for xtx, xty, n, fails in pieces:
        acc = merge(acc, NormalEqAccumulator(acc.d, xtx, xty, n))
        failures += fails
    fit = solve_ne(acc, x_names, rank_tol=args.rank_tol)
    elapsed = time.perf_counter() - started
    width = max(len(n) for n in x_names)
    out = sys.stdout
    for name in x_names:
        if name in fit.coef:
            print(f"{name:<{width}}  {fit.coef[name]!r}", file=out)
    if fit.dropped:
        print("aliased: " + ", ".join(fit.dropped), file=out)
    print(
        f"rows: {acc.n}, chunks: {len(pieces)}, coercion failures: {failures}, "
        f"rank: {fit.rank}/{acc.d}, {elapsed:.2f} s",
        file=sys.stderr,
    )
    return EXIT_OK


def cmd_bench(args) -> int:
    if (args.size_mb is None) == (args.input is None):
        raise SchemaError("give exactly one of --size-mb or an input path")
    cleanup = None
    if args.input is None:
        if args.schema:
            print("note: --schema is ignored with --size-mb (synthetic data "
                  f"is always {SYNTHETIC_SCHEMA_LETTERS})", file=sys.stderr)
        letters = SYNTHETIC_SCHEMA_LETTERS
        fd, path = tempfile.mkstemp(prefix="rowstream-bench-", suffix=".csv")
        with os.fdopen(fd, "wb") as handle:
            handle.write(synthetic_csv(args.size_mb * 1_000_000))
        cleanup = path
    else:
        if not args.schema:
            raise SchemaError("--schema is required with an input file")
        letters = args.schema
        path = args.input
    schema = Schema(_parse_types(letters), field_sep=_sep_bytes(args.sep))
    try:
        report = run_bench(path, schema, trials=args.trials)
    finally:
        if cleanup:
            os.unlink(cleanup)
    print(report.render())
    return EXIT_OK if report.frames_match else EXIT_VERIFY


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rowstream",
        description="Chunked delimited-text toolkit: stream, parse, "
                    "checkpoint model matrices, and fit least squares "
                    "out of core.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("parse", help="parse a delimited file and re-serialize it")
    p.add_argument("input", help="path to a delimited text file")
    p.add_argument("--sep", default=",", help="field separator (default ,)")
    p.add_argument("--schema", required=True, help=_SCHEMA_HELP)
    p.add_argument("--header", action="store_true",
                   help="first record names the columns")
    p.add_argument("--skip", type=int, default=0, metavar="N",
                   help="skip N leading records")
    p.add_argument("--out", default="-", help="output path, - for stdout")
    p.add_argument("--strict", action="store_true",
                   help="treat coercion failures and ragged rows as errors")
    p.set_defaults(func=cmd_parse)

    p = sub.add_parser("mm", help="expand inputs into a model-matrix checkpoint")
    p.add_argument("inputs", nargs="+", help="delimited input files (shared schema)")
    p.add_argument("--response", required=True, metavar="COL")
    p.add_argument("--numeric", action=_TermAction, metavar="COL[,COL...]",
                   help="numeric regressor column(s); order of term flags is "
                        "the checkpoint column order")
    p.add_argument("--factor", action=_TermAction, metavar="COL=L1,L2,...",
                   help="factor column with ordered levels (first is baseline)")
    p.add_argument("--hhmm", action=_TermAction, metavar="COL[,COL...]",
                   help="clock column(s): normalized to minutes, then numeric")
    p.add_argument("--out", required=True, metavar="CHECKPOINT")
    p.add_argument("--schema", default="infer", help=_SCHEMA_HELP)
    p.add_argument("--sep", default=",")
    p.add_argument("--header", action="store_true")
    p.add_argument("--skip", type=int, default=0, metavar="N")
    p.set_defaults(func=cmd_mm)

    p = sub.add_parser("fit", help="least squares over a checkpoint")
    p.add_argument("checkpoint")
    p.add_argument("--response", required=True, metavar="NAME")
    p.add_argument("--parallel", type=int, default=1)
    p.add_argument("--mode", choices=("seq", "pipeline", "split"),
                   default="seq")
    p.add_argument("--rank-tol", type=float, default=DEFAULT_RANK_TOL)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("bench", help="compare bulk vs naive parse throughput")
    p.add_argument("input", nargs="?", help="existing delimited file")
    p.add_argument("--size-mb", type=int, metavar="N",
                   help="generate N MB of synthetic data instead")
    p.add_argument("--schema", help=_SCHEMA_HELP + " (required with an input file)")
    p.add_argument("--sep", default=",")
    p.add_argument("--trials", type=int, default=5)
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except StrictViolation as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VERIFY
    except (RowstreamError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
