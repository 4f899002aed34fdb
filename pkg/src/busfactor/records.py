"""Core value types produced by repository ingestion.

Everything here is immutable after construction and safe to share
across threads.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import Mapping, Sequence


@dataclass(frozen=True, order=True)
class RawAuthor:
    """An author string pair exactly as git recorded it.

    Normalization and alias merging happen later, in the identity
    module; name and email are never both empty.
    """
    name: str
    email: str

    def __post_init__(self):
        if not self.name and not self.email:
            raise ValueError("author name and email are both empty")

    def __str__(self) -> str:
        return f"{self.name} <{self.email}>"


@dataclass(frozen=True)
class CommitMeta:
    """Commit-level metadata carried by every change record.

    `sequence` is the commit's position in the ingestion order
    (topological, author-date ordered, oldest first); it breaks
    timestamp ties deterministically.
    """
    hash: str
    author: RawAuthor
    author_timestamp: datetime
    is_merge: bool = False
    sequence: int = 0

    def __post_init__(self):
        if self.author_timestamp.tzinfo is None:
            object.__setattr__(
                self, "author_timestamp",
                self.author_timestamp.replace(tzinfo=timezone.utc))
        else:
            object.__setattr__(
                self, "author_timestamp",
                self.author_timestamp.astimezone(timezone.utc))


@dataclass(frozen=True)
class ChangeRecord:
    """One (commit, file) modification.

    Token bags are multisets of the alphanumeric tokens appearing on
    this record's added and deleted lines only. lines_added +
    lines_deleted is always >= 1; zero-change records are never
    emitted by ingestion.
    """
    commit: CommitMeta
    path: str
    lines_added: int
    lines_deleted: int
    added_tokens: Mapping[str, int] = field(default_factory=dict)
    deleted_tokens: Mapping[str, int] = field(default_factory=dict)

    @property
    def author(self) -> RawAuthor:
        return self.commit.author

    def sort_key(self):
        """Chronological ordering key (author date, ingestion order, hash)."""
        return (self.commit.author_timestamp, self.commit.sequence, self.commit.hash)


@dataclass(frozen=True)
class BlameSnapshot:
    """Per-line attribution of every text file at one revision.

    `files` maps a repo-relative path to the ordered list of authors,
    one per line; the list length equals the file's line count at
    `revision`. Files with zero lines are not listed.
    """
    revision: str
    files: Mapping[str, Sequence[RawAuthor]]

    def authors(self) -> set[RawAuthor]:
        """Every author attributed at least one line."""
        seen: set[RawAuthor] = set()
        for lines in self.files.values():
            seen.update(lines)
        return seen
