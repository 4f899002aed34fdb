"""Extraction of commit history and blame data from a local git clone.

All git access goes through the command-line client. History is read
in one streaming `git log` pass with zero-context patches so that line
counts match `git log --numstat` while the changed lines themselves
are available for tokenization.
"""
from __future__ import annotations

import os
import re
import subprocess
from concurrent.futures import ThreadPoolExecutor
from datetime import datetime, timezone
from typing import Iterable, Iterator, Sequence

from .errors import (
    EmptyRepository,
    GitInvocationFailure,
    InvalidGlob,
    NotARepository,
    NoTextFiles,
    UnknownRevision,
)
from .metrics import tokenize
from .records import BlameSnapshot, ChangeRecord, CommitMeta, RawAuthor

_FIELD_SEP = "\x01"
_COMMIT_MARK = "\x00"
# Pretty format: NUL marker, then hash/name/email/author-epoch/parents.
_LOG_FORMAT = "%x00%H%x01%an%x01%ae%x01%at%x01%P"

_BLAME_WORKERS = min(8, os.cpu_count() or 1)


def _git(repo_path: str, *args: str, ok_codes: Sequence[int] = (0,)) -> str:
    """Run one git command and return stdout, raising on failure."""
    cmd = ["git", "-C", str(repo_path), "-c", "core.quotepath=false", *args]
    try:
        proc = subprocess.run(
            cmd, capture_output=True, text=True,
            encoding="utf-8", errors="replace")
    except OSError as exc:
        raise GitInvocationFailure(" ".join(cmd), -1, str(exc))
    if proc.returncode not in ok_codes:
        raise GitInvocationFailure(" ".join(args), proc.returncode, proc.stderr)
    return proc.stdout


def _git_stream(repo_path: str, *args: str) -> Iterator[str]:
    """Stream stdout lines of one git command (newlines stripped)."""
    cmd = ["git", "-C", str(repo_path), "-c", "core.quotepath=false", *args]
    proc = subprocess.Popen(
        cmd, stdout=subprocess.PIPE, stderr=subprocess.PIPE,
        text=True, encoding="utf-8", errors="replace")
    assert proc.stdout is not None
    try:
        for line in proc.stdout:
            yield line.rstrip("\n")
    finally:
        proc.stdout.close()
        stderr = proc.stderr.read() if proc.stderr else ""
        if proc.stderr:
            proc.stderr.close()
        returncode = proc.wait()
        if returncode != 0:
            raise GitInvocationFailure(" ".join(args), returncode, stderr)


def check_repository(repo_path: str) -> None:
    """Raise NotARepository unless repo_path has git metadata."""
    if not os.path.isdir(repo_path):
        raise NotARepository(f"not a directory: {repo_path}")
    probe = subprocess.run(
        ["git", "-C", str(repo_path), "rev-parse", "--git-dir"],
        capture_output=True, text=True)
    if probe.returncode != 0:
        raise NotARepository(f"no git repository at {repo_path}")


def head_revision(repo_path: str) -> str:
    """Full hash of HEAD; raises EmptyRepository when there are no commits."""
    check_repository(repo_path)
    probe = subprocess.run(
        ["git", "-C", str(repo_path), "rev-parse", "--verify", "HEAD"],
        capture_output=True, text=True)
    if probe.returncode != 0:
        raise EmptyRepository(f"repository at {repo_path} has no commits")
    return probe.stdout.strip()


def resolve_revision(repo_path: str, revision: str) -> str:
    """Resolve a revision name to its full commit hash."""
    check_repository(repo_path)
    probe = subprocess.run(
        ["git", "-C", str(repo_path), "rev-parse", "--verify",
         f"{revision}^{{commit}}"],
        capture_output=True, text=True)
    if probe.returncode != 0:
        raise UnknownRevision(f"cannot resolve revision {revision!r}")
    return probe.stdout.strip()


def repo_fingerprint(repo_path: str) -> str:
    """Stable identifier for a working copy: origin URL or path, plus HEAD."""
    head = head_revision(repo_path)
    origin = subprocess.run(
        ["git", "-C", str(repo_path), "config", "--get", "remote.origin.url"],
        capture_output=True, text=True)
    source = origin.stdout.strip() if origin.returncode == 0 else ""
    if not source:
        source = os.path.abspath(repo_path)
    return f"{source}@{head}"


# --- history extraction ---

def _parse_header(line: str, sequence: int) -> CommitMeta:
    hash_, name, email, epoch, parents = line[1:].split(_FIELD_SEP)
    return CommitMeta(
        hash=hash_,
        author=RawAuthor(name=name, email=email),
        author_timestamp=datetime.fromtimestamp(int(epoch), tz=timezone.utc),
        is_merge=len(parents.split()) > 1,
        sequence=sequence,
    )


class _FileDiff:
    """Accumulates one file section of a commit's patch."""

    def __init__(self):
        self.old_path: str | None = None
        self.new_path: str | None = None
        self.binary = False
        self.gitlink = False
        self.added: list[str] = []
        self.deleted: list[str] = []

    @property
    def path(self) -> str | None:
        # Post-image path, unless the file was deleted.
        if self.new_path is not None:
            return self.new_path
        return self.old_path

    def to_record(self, commit: CommitMeta) -> ChangeRecord | None:
        if self.binary or self.gitlink or self.path is None:
            return None
        if not self.added and not self.deleted:
            return None  # mode-only or empty-file change
        return ChangeRecord(
            commit=commit,
            path=self.path,
            lines_added=len(self.added),
            lines_deleted=len(self.deleted),
            added_tokens=tokenize(self.added),
            deleted_tokens=tokenize(self.deleted),
        )


def _strip_diff_path(header_line: str, prefix: str) -> str | None:
    # "--- a/path" / "+++ b/path" / "--- /dev/null"
    value = header_line[4:]
    if value == "/dev/null":
        return None
    if value.startswith(prefix):
        value = value[len(prefix):]
    # git appends "\t" before an EOL marker for paths ending in spaces
    return value.rstrip("\t")


def extract_history(repo_path: str, include_merges: bool = False) -> Iterator[ChangeRecord]:
    """Yield one ChangeRecord per (commit, modified text file) pair.

    Covers the full history of the currently checked-out branch,
    oldest first (author-date order under topological constraints).
    Merge commits are skipped unless include_merges is set, in which
    case their diff is taken against the first parent. Binary files
    and submodule pointer bumps are skipped.
    """
    head_revision(repo_path)  # raises NotARepository / EmptyRepository

    args = ["log", "--reverse", "--author-date-order", "--no-renames",
            "-p", "-U0", f"--pretty=format:{_LOG_FORMAT}"]
    if include_merges:
        args.append("--diff-merges=first-parent")
    else:
        args.append("--no-merges")

    commit: CommitMeta | None = None
    current: _FileDiff | None = None
    in_hunks = False
    sequence = 0

    def flush():
        nonlocal current
        record = current.to_record(commit) if current and commit else None
        current = None
        return record

    for line in _git_stream(repo_path, *args):
        if line.startswith(_COMMIT_MARK):
            record = flush()
            if record:
                yield record
            commit = _parse_header(line, sequence)
            sequence += 1
            in_hunks = False
            continue
        if commit is None:
            continue
        if line.startswith("diff --git "):
            record = flush()
            if record:
                yield record
            current = _FileDiff()
            in_hunks = False
            continue
        if current is None:
            continue
        if line.startswith("@@"):
            in_hunks = True
            continue
        if in_hunks:
            # With -U0 hunk bodies hold only +/-/backslash lines.
            if line.startswith("+"):
                current.added.append(line[1:])
            elif line.startswith("-"):
                current.deleted.append(line[1:])
            continue
        # Preamble of a file section (between "diff --git" and first hunk).
        if line.startswith("--- "):
            current.old_path = _strip_diff_path(line, "a/")
        elif line.startswith("+++ "):
            current.new_path = _strip_diff_path(line, "b/")
        elif line.startswith("Binary files ") or line.startswith("GIT binary patch"):
            current.binary = True
        elif "160000" in line and re.match(
                r"(index \S+ 160000|old mode 160000|new mode 160000"
                r"|new file mode 160000|deleted file mode 160000)", line):
            current.gitlink = True

    record = flush()
    if record:
        yield record


# --- blame extraction ---

_TEXT_BLOB_MODES = ("100644", "100755")


def _list_text_files(repo_path: str, revision: str, path_filter: str | None) -> list[str]:
    """Regular-blob text files at a revision, optionally under a prefix."""
    args = ["ls-tree", "-r", revision]
    if path_filter:
        args += ["--", path_filter]
    entries = []
    for line in _git(repo_path, *args).splitlines():
        meta, _, path = line.partition("\t")
        mode, kind, _ = meta.split(" ", 2)
        if kind == "blob" and mode in _TEXT_BLOB_MODES:
            entries.append(path)

    # Binary detection: numstat against the empty tree reports "-" counts.
    empty_tree = _git(repo_path, "hash-object", "-t", "tree", os.devnull).strip()
    binary: set[str] = set()
    nonempty: set[str] = set()
    numstat_args = ["diff", "--numstat", "--no-renames", empty_tree, revision]
    if path_filter:
        numstat_args += ["--", path_filter]
    for line in _git(repo_path, *numstat_args).splitlines():
        added, _, rest = line.split("\t", 2)
        if added == "-":
            binary.add(rest)
        elif int(added) > 0:
            nonempty.add(rest)
    return sorted(p for p in entries if p not in binary and p in nonempty)


_AUTHOR_RE = re.compile(r"^author (.*)$")
_MAIL_RE = re.compile(r"^author-mail <(.*)>$")


def _blame_file(repo_path: str, revision: str, path: str) -> list[RawAuthor]:
    """Line attributions for one file, in line order."""
    lines: list[RawAuthor] = []
    name = ""
    email = ""
    for line in _git(repo_path, "blame", "--line-porcelain", revision,
                     "--", path).splitlines():
        if line.startswith("\t"):
            lines.append(RawAuthor(name=name, email=email))
            continue
        m = _AUTHOR_RE.match(line)
        if m:
            name = m.group(1)
            continue
        m = _MAIL_RE.match(line)
        if m:
            email = m.group(1)
    return lines


def extract_blame(repo_path: str, revision: str = "HEAD",
                  path_filter: str | None = None) -> BlameSnapshot:
    """Blame every text file at a revision.

    Each line is attributed to the raw author of the commit that last
    changed it (plain blame, no copy/move detection). Raises
    NoTextFiles when the filter matches nothing blame-able.
    """
    resolved = resolve_revision(repo_path, revision)
    if path_filter:
        path_filter = path_filter.strip("/")
    paths = _list_text_files(repo_path, resolved, path_filter)
    if not paths:
        detail = f"under {path_filter!r} " if path_filter else ""
        raise NoTextFiles(f"no text files {detail}at revision {revision}")

    with ThreadPoolExecutor(max_workers=_BLAME_WORKERS) as pool:
        attributions = list(pool.map(
            lambda p: _blame_file(repo_path, resolved, p), paths))
    files = {path: tuple(lines)
             for path, lines in zip(paths, attributions) if lines}
    if not files:
        raise NoTextFiles(f"no blame-able lines at revision {revision}")
    return BlameSnapshot(revision=resolved, files=files)


# --- path filtering ---

def _glob_to_regex(pattern: str) -> re.Pattern:
    """Translate a path glob to a regex.

    `*` and `?` do not cross `/`; `**` spans directories, and a
    leading `**/` also matches zero directories.
    """
    if not pattern or pattern.isspace():
        raise InvalidGlob("empty pattern")
    pattern = pattern.lstrip("/")
    out = []
    i = 0
    n = len(pattern)
    while i < n:
        ch = pattern[i]
        if ch == "*":
            if pattern[i:i + 2] == "**":
                i += 2
                if pattern[i:i + 1] == "/":
                    i += 1
                    out.append(r"(?:.*/)?")  # **/ matches zero or more dirs
                else:
                    out.append(r".*")
            else:
                out.append(r"[^/]*")
                i += 1
        elif ch == "?":
            out.append(r"[^/]")
            i += 1
        elif ch == "[":
            j = i + 1
            if j < n and pattern[j] in "!]":
                j += 1
            while j < n and pattern[j] != "]":
                j += 1
            if j >= n:
                raise InvalidGlob(f"unterminated character class in {pattern!r}")
            cls = pattern[i + 1:j].replace("\\", "\\\\")
            if cls.startswith("!"):
                cls = "^" + cls[1:]
            out.append(f"[{cls}]")
            i = j + 1
        else:
            out.append(re.escape(ch))
            i += 1
    try:
        return re.compile("^" + "".join(out) + "$")
    except re.error as exc:
        raise InvalidGlob(f"cannot compile pattern {pattern!r}: {exc}")


def compile_globs(patterns: Iterable[str]) -> list[re.Pattern]:
    return [_glob_to_regex(p) for p in patterns]


def path_matches(path: str, compiled: Sequence[re.Pattern]) -> bool:
    return any(rx.match(path) for rx in compiled)


def filter_external(records: Iterable[ChangeRecord],
                    exclude_globs: Sequence[str]) -> list[ChangeRecord]:
    """Drop records whose path matches any exclusion glob.

    Relative order is preserved and the input is left unmodified.
    """
    compiled = compile_globs(exclude_globs)
    if not compiled:
        return list(records)
    return [r for r in records if not path_matches(r.path, compiled)]


def filter_snapshot(blame: BlameSnapshot, scope: str | None = None,
                    exclude_globs: Sequence[str] = ()) -> BlameSnapshot:
    """Restrict a blame snapshot to a directory prefix minus exclusions."""
    compiled = compile_globs(exclude_globs)
    prefix = scope.strip("/") + "/" if scope else ""
    files = {
        path: lines for path, lines in blame.files.items()
        if (not prefix or path.startswith(prefix) or path == prefix.rstrip("/"))
        and not path_matches(path, compiled)
    }
    return BlameSnapshot(revision=blame.revision, files=files)
