"""Command-line interface: ingest, cst, rig, trend, compare."""
from __future__ import annotations

import argparse
import configparser
import os
import shlex
import sys
from collections import Counter
from datetime import datetime, timezone
from pathlib import Path

from . import __version__
from .cache import CacheManifest, load_cache, save_cache
from .cst import (CstConfig, CstMetricKind, TimeWindow, WeightScheme,
                  compare_error, cst_bus_factor)
from .errors import (BusFactorError, EmptySnapshot, IoFailure, NoTextFiles,
                     UnknownRevision)
from .gitrepo import (check_repository, extract_blame, extract_history,
                      filter_snapshot, head_revision, repo_fingerprint,
                      resolve_revision)
from .identity import (DEFAULT_SIMILARITY, parse_alias_file,
                       resolve_identities)
from .metrics import DataMetric, MetricKind
from .report import (FORMATS, RunManifest, payload_cst, payload_ingest,
                     payload_rig, payload_trend, render)
from .rig import RigConfig, rig_repeat
from .trend import yearly_trend

_ENV_CACHE = "BUSFACTOR_CACHE_DIR"


# --- argument casting ----------------------------------------------------

def _int_min(minimum: int):
    def cast(text: str) -> int:
        try:
            value = int(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}")
        if value < minimum:
            raise argparse.ArgumentTypeError(f"must be >= {minimum}")
        return value
    return cast


def _any_int(text: str) -> int:
    try:
        return int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}")


def _fraction(text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number, got {text!r}")
    if not 0.0 < value <= 1.0:
        raise argparse.ArgumentTypeError("must lie in (0, 1]")
    return value


def _similarity(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}")
    if not 0 <= value <= 100:
        raise argparse.ArgumentTypeError("must lie in 0..100")
    return value


# --- config file ---------------------------------------------------------

def _config_bool(raw: str) -> bool:
    states = configparser.ConfigParser.BOOLEAN_STATES
    key = raw.strip().lower()
    if key not in states:
        raise ValueError(f"not a boolean: {raw!r}")
    return states[key]


def _config_list(raw: str) -> list[str]:
    parts = [piece.strip() for chunk in raw.splitlines()
             for piece in chunk.split(",")]
    return [piece for piece in parts if piece]


_CONFIG_CASTS = {
    "similarity": int, "samples": int, "max-g": int, "seed": int,
    "runs": int, "from-year": int, "to-year": int,
    "bf": int, "reference": int,
    "line-abandon": float, "file-abandon": float,
    "cos-scale-locc": _config_bool, "redact": _config_bool,
    "include-merges": _config_bool, "exhaustive": _config_bool,
    "cumulative": _config_bool,
    "exclude": _config_list,
}

# Keys a config file may set, per section; sections mirror subcommands.
_CONFIG_KEYS = {
    "ingest": {"repo", "cache", "include-merges"},
    "cst": {"repo", "cache", "metric", "cos-scale-locc", "cst-metric",
            "dir", "from", "to", "exclude", "alias-file", "similarity",
            "format", "out", "redact", "weight-scheme"},
    "rig": {"repo", "cache", "rev", "samples", "max-g", "seed", "runs",
            "exhaustive", "line-abandon", "file-abandon", "dir", "exclude",
            "alias-file", "similarity", "format", "out", "redact"},
    "trend": {"repo", "cache", "from-year", "to-year", "metric",
              "cos-scale-locc", "cst-metric", "dir", "exclude",
              "alias-file", "similarity", "format", "out", "redact",
              "cumulative", "weight-scheme"},
    "compare": {"bf", "reference"},
}

_CONFIG_DEST = {"from": "time_from", "to": "time_to",
                "exclude": "exclude_cfg"}


def _peek(argv: list[str], flag: str) -> str | None:
    """Find a flag value without a full parse (for --config)."""
    for i, token in enumerate(argv):
        if token == flag and i + 1 < len(argv):
            return argv[i + 1]
        if token.startswith(flag + "="):
            return token[len(flag) + 1:]
    return None


def _apply_config(parser: argparse.ArgumentParser, path: str,
                  section: str | None) -> None:
    """Feed config-file values in as parser defaults; real flags win.

    Defaults are installed on the invoked subcommand's parser:
    subparsers build their own namespace, so defaults on the top-level
    parser would be overwritten.
    """
    reader = configparser.ConfigParser()
    try:
        with open(path, encoding="utf-8") as fh:
            reader.read_file(fh)
    except OSError as exc:
        parser.error(f"--config: cannot read {path}: {exc}")
    except configparser.Error as exc:
        parser.error(f"--config: {exc}")
    target = parser.subcommands.get(section) if section else None
    if target is None or section not in reader:
        return
    allowed = _CONFIG_KEYS.get(section, set())
    defaults = {}
    for key, raw in reader[section].items():
        if key not in allowed:
            parser.error(f"--config: unknown key {key!r} in [{section}]")
        cast = _CONFIG_CASTS.get(key, str)
        try:
            value = cast(raw)
        except ValueError as exc:
            parser.error(f"--config: bad value for {key!r}: {exc}")
        defaults[_CONFIG_DEST.get(key, key.replace("-", "_"))] = value
    target.set_defaults(**defaults)


# --- parser --------------------------------------------------------------

def _add_common(sub: argparse.ArgumentParser, name: str,
                source: bool = True) -> None:
    sub.add_argument("--config", metavar="FILE",
                     help=f"config file with [{name}] key=value defaults")
    if source:
        sub.add_argument("--repo", metavar="PATH",
                         help="path to a local git clone")
        sub.add_argument("--cache", metavar="PATH",
                         help=f"cache directory from `busfactor ingest` "
                              f"(default: ${_ENV_CACHE})")


def _add_identity_flags(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--alias-file", metavar="PATH",
                     help="file of `raw_email -> canonical_email` merges")
    sub.add_argument("--similarity", type=_similarity,
                     default=DEFAULT_SIMILARITY, metavar="0-100",
                     help="name-similarity threshold for identity merging "
                          "(default %(default)s)")


def _add_scope_flags(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--dir", metavar="PREFIX",
                     help="restrict analysis to one directory subtree")
    sub.add_argument("--exclude", action="append", metavar="GLOB",
                     help="drop paths matching this glob (repeatable)")


def _add_output_flags(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--format", choices=FORMATS, default="text",
                     help="output format (default %(default)s)")
    sub.add_argument("--out", metavar="PATH",
                     help="write the report here instead of stdout")
    sub.add_argument("--redact", action="store_true",
                     help="replace developer identities with stable hashes")


def _add_cst_metric_flags(sub: argparse.ArgumentParser,
                          required: bool) -> None:
    sub.add_argument("--metric",
                     choices=[k.value for k in MetricKind],
                     required=False,
                     default=None if required else MetricKind.COMMITS.value,
                     help="contribution metric")
    sub.add_argument("--cos-scale-locc", action="store_true",
                     help="scale cosine distance by lines changed")
    sub.add_argument("--cst-metric",
                     choices=[k.value for k in CstMetricKind],
                     required=False,
                     default=(None if required
                              else CstMetricKind.MUL_CHANGES_EQUAL.value),
                     help="knowledge metric")
    sub.add_argument("--from", dest="time_from", metavar="YYYY[-MM]",
                     help="start of the analyzed period (inclusive)")
    sub.add_argument("--to", dest="time_to", metavar="YYYY[-MM]",
                     help="end of the analyzed period (inclusive)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="busfactor",
        description="Estimate a git repository's bus factor from its "
                    "commit history or line ownership.")
    parser.add_argument("--version", action="version",
                        version=f"%(prog)s {__version__}")
    commands = parser.add_subparsers(dest="command", required=True,
                                     metavar="COMMAND")

    ingest = commands.add_parser(
        "ingest", help="extract history and blame into a cache directory")
    _add_common(ingest, "ingest")
    ingest.add_argument("--include-merges", action="store_true",
                        help="keep merge commits (first-parent diffs)")
    ingest.set_defaults(func=_cmd_ingest)

    cst = commands.add_parser(
        "cst", help="commit-based bus factor")
    _add_common(cst, "cst")
    _add_cst_metric_flags(cst, required=True)
    _add_scope_flags(cst)
    _add_identity_flags(cst)
    _add_output_flags(cst)
    cst.set_defaults(func=_cmd_cst)

    rig = commands.add_parser(
        "rig", help="bus factor by simulated developer departure")
    _add_common(rig, "rig")
    rig.add_argument("--rev", metavar="REV",
                     help="revision to blame (default HEAD)")
    rig.add_argument("--samples", type=_int_min(1), default=1000,
                     help="random subsets per group size (default %(default)s)")
    rig.add_argument("--max-g", type=_int_min(1), default=200,
                     help="largest departing group to try (default %(default)s)")
    rig.add_argument("--seed", type=_any_int, default=0,
                     help="random seed (default %(default)s)")
    rig.add_argument("--runs", type=_int_min(1), default=1,
                     help="independent runs with derived seeds (default %(default)s)")
    rig.add_argument("--exhaustive", action="store_true",
                     help="enumerate every subset instead of sampling (exact)")
    rig.add_argument("--line-abandon", type=_fraction, default=0.90,
                     metavar="RATIO",
                     help="line-ownership fraction that abandons a file "
                          "(default %(default)s)")
    rig.add_argument("--file-abandon", type=_fraction, default=0.50,
                     metavar="RATIO",
                     help="abandoned-file fraction that abandons the project "
                          "(default %(default)s)")
    _add_scope_flags(rig)
    _add_identity_flags(rig)
    _add_output_flags(rig)
    rig.set_defaults(func=_cmd_rig)

    trend = commands.add_parser(
        "trend", help="per-year bus factor series")
    _add_common(trend, "trend")
    trend.add_argument("--from-year", type=_int_min(1), default=None,
                       metavar="YYYY", help="first year of the series")
    trend.add_argument("--to-year", type=_int_min(1), default=None,
                       metavar="YYYY", help="last year of the series")
    trend.add_argument("--cumulative", action="store_true",
                       help="each point covers all history through its year")
    _add_cst_metric_flags(trend, required=False)
    _add_scope_flags(trend)
    _add_identity_flags(trend)
    _add_output_flags(trend)
    trend.set_defaults(func=_cmd_trend)

    compare = commands.add_parser(
        "compare", help="absolute error against a reference bus factor")
    compare.add_argument("--config", help=argparse.SUPPRESS)
    compare.add_argument("--bf", type=_int_min(0), default=None,
                         help="computed bus factor")
    compare.add_argument("--reference", type=_int_min(0), default=None,
                         help="reference bus factor to compare against")
    compare.set_defaults(func=_cmd_compare)

    parser.subcommands = {"ingest": ingest, "cst": cst, "rig": rig,
                          "trend": trend, "compare": compare}
    return parser


# --- shared command plumbing ----------------------------------------------

def _require(parser, args, dest: str, flag: str):
    value = getattr(args, dest, None)
    if value is None:
        parser.error(f"{flag} is required")
    return value


def _resolve_source(parser, args) -> tuple[str | None, str | None]:
    repo, cache = args.repo, args.cache
    if repo and cache:
        parser.error("--repo and --cache are mutually exclusive")
    if not repo and not cache:
        cache = os.environ.get(_ENV_CACHE)
        if not cache:
            parser.error("one of --repo or --cache is required "
                         f"(or set ${_ENV_CACHE})")
    return repo, cache


def _load_history(repo: str | None, cache: str | None):
    """Records + fingerprint from either a live repo or a cache dir."""
    if repo:
        check_repository(repo)
        return list(extract_history(repo)), repo_fingerprint(repo)
    records, _, manifest = load_cache(cache)
    return records, manifest.repo_fingerprint


def _identity_for(parser, args, weights: Counter):
    aliases = None
    if args.alias_file:
        try:
            aliases = parse_alias_file(args.alias_file)
        except OSError as exc:
            raise IoFailure(f"cannot read alias file: {exc}") from exc
        except ValueError as exc:
            parser.error(f"--alias-file: {exc}")
    return resolve_identities(weights.keys(),
                              similarity_threshold=args.similarity,
                              weights=weights, aliases=aliases)


def _window(parser, args) -> TimeWindow | None:
    if not args.time_from and not args.time_to:
        return None
    try:
        return TimeWindow.parse(args.time_from, args.time_to)
    except ValueError as exc:
        parser.error(f"--from/--to: {exc}")


def _weight_scheme(parser, args) -> WeightScheme:
    raw = getattr(args, "weight_scheme", None)
    if raw is None:
        return WeightScheme.LINEAR
    try:
        return WeightScheme(raw)
    except ValueError:
        parser.error(f"--config: weight-scheme must be one of "
                     f"{[s.value for s in WeightScheme]}")


def _excludes(args) -> tuple[str, ...]:
    if args.exclude:
        return tuple(args.exclude)
    return tuple(getattr(args, "exclude_cfg", ()) or ())


def _manifest(argv, fingerprint, started, seed=None) -> RunManifest:
    return RunManifest(
        tool_version=__version__,
        command_line="busfactor " + " ".join(shlex.quote(a) for a in argv),
        repo_fingerprint=fingerprint,
        started_at=started,
        finished_at=datetime.now(timezone.utc),
        seed=seed,
    )


def _emit(payload: dict, args) -> None:
    data = render(payload, args.format)
    if args.out:
        try:
            Path(args.out).write_bytes(data)
        except OSError as exc:
            raise IoFailure(f"cannot write {args.out}: {exc}") from exc
    else:
        sys.stdout.write(data.decode("utf-8"))


# --- subcommands -----------------------------------------------------------

def _cmd_ingest(parser, args, argv, started) -> int:
    repo = _require(parser, args, "repo", "--repo")
    cache = args.cache or os.environ.get(_ENV_CACHE)
    if not cache:
        parser.error(f"--cache is required (or set ${_ENV_CACHE})")
    check_repository(repo)
    records = list(extract_history(repo, include_merges=args.include_merges))
    head = head_revision(repo)
    try:
        blame = extract_blame(repo, head)
    except NoTextFiles:
        blame = None
    fingerprint = repo_fingerprint(repo)
    save_cache(records, blame,
               CacheManifest(repo_fingerprint=fingerprint,
                             created_at=started,
                             record_count=len(records)),
               cache)
    stats = {
        "cache_path": str(cache),
        "records": len(records),
        "commits": len({r.commit.hash for r in records}),
        "files_in_history": len({r.path for r in records}),
        "blame_files": len(blame.files) if blame else 0,
        "authors": len({r.author for r in records}
                       | (blame.authors() if blame else set())),
    }
    sys.stdout.write(
        render(payload_ingest(stats, _manifest(argv, fingerprint, started)),
               "text").decode("utf-8"))
    return 0


def _cmd_cst(parser, args, argv, started) -> int:
    metric = _require(parser, args, "metric", "--metric")
    cst_metric = _require(parser, args, "cst_metric", "--cst-metric")
    repo, cache = _resolve_source(parser, args)
    records, fingerprint = _load_history(repo, cache)
    identity = _identity_for(parser, args,
                             Counter(r.author for r in records))
    config = CstConfig(
        cst_metric=CstMetricKind(cst_metric),
        data_metric=DataMetric(MetricKind(metric),
                               cos_scale_by_locc=args.cos_scale_locc),
        scope=args.dir,
        time_range=_window(parser, args),
        exclude_globs=_excludes(args),
        weight_scheme=_weight_scheme(parser, args),
    )
    result = cst_bus_factor(records, identity, config)
    payload = payload_cst(result, _manifest(argv, fingerprint, started),
                          redact=args.redact)
    _emit(payload, args)
    return 0


def _cmd_rig(parser, args, argv, started) -> int:
    repo, cache = _resolve_source(parser, args)
    if repo:
        check_repository(repo)
        revision = resolve_revision(repo, args.rev or "HEAD")
        blame = extract_blame(repo, revision, path_filter=args.dir)
        fingerprint = repo_fingerprint(repo)
    else:
        _, blame, cache_manifest = load_cache(cache)
        if blame is None:
            raise EmptySnapshot("cache holds no blame data; re-run ingest")
        if args.rev and not blame.revision.startswith(args.rev):
            raise UnknownRevision(
                f"cache holds blame for {blame.revision}, not {args.rev}")
        fingerprint = cache_manifest.repo_fingerprint
    blame = filter_snapshot(blame, scope=args.dir,
                            exclude_globs=_excludes(args))

    weights = Counter()
    for lines in blame.files.values():
        weights.update(lines)
    identity = _identity_for(parser, args, weights)

    config = RigConfig(
        max_group_size=args.max_g,
        samples_per_size=args.samples,
        seed=args.seed,
        line_abandon_fraction=args.line_abandon,
        file_abandon_fraction=args.file_abandon,
        exhaustive=args.exhaustive,
    )
    results = rig_repeat(blame, identity, config, runs=args.runs)
    developer_count = len({identity.canonical(a) for a in blame.authors()})
    payload = payload_rig(results, config,
                          _manifest(argv, fingerprint, started, seed=args.seed),
                          revision=blame.revision,
                          file_count=len(blame.files),
                          developer_count=developer_count,
                          redact=args.redact)
    _emit(payload, args)
    return 0


def _cmd_trend(parser, args, argv, started) -> int:
    first = _require(parser, args, "from_year", "--from-year")
    last = _require(parser, args, "to_year", "--to-year")
    repo, cache = _resolve_source(parser, args)
    records, fingerprint = _load_history(repo, cache)
    identity = _identity_for(parser, args,
                             Counter(r.author for r in records))
    base = CstConfig(
        cst_metric=CstMetricKind(args.cst_metric),
        data_metric=DataMetric(MetricKind(args.metric),
                               cos_scale_by_locc=args.cos_scale_locc),
        scope=args.dir,
        time_range=None,
        exclude_globs=_excludes(args),
        weight_scheme=_weight_scheme(parser, args),
    )
    series = yearly_trend(records, identity, base, first, last,
                          cumulative=args.cumulative)
    payload = payload_trend(series, _manifest(argv, fingerprint, started))
    _emit(payload, args)
    return 0


def _cmd_compare(parser, args, argv, started) -> int:
    bf = _require(parser, args, "bf", "--bf")
    reference = _require(parser, args, "reference", "--reference")
    sys.stdout.write(f"{compare_error(bf, reference)}\n")
    return 0


# --- entry point -----------------------------------------------------------

def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:]) if argv is None else list(argv)
    parser = build_parser()
    config_path = _peek(argv, "--config")
    section = next((a for a in argv if not a.startswith("-")), None)
    try:
        if config_path:
            _apply_config(parser, config_path, section)
        args = parser.parse_args(argv)
        started = datetime.now(timezone.utc)
        return args.func(parser, args, argv, started)
    except SystemExit as exc:
        code = exc.code
        return code if isinstance(code, int) else (0 if code is None else 2)
    except BusFactorError as exc:
        print(f"ERROR {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
