"""Rating matrices, content catalogs, and event logs for a two-domain setup.

All loaders validate eagerly and report the offending line, field, or item
in the error message.  Loaded values are treated as immutable; every export
writes rows in a deterministic order so that a reload reproduces the same
object and a rerun reproduces the same bytes.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Iterable, Mapping

from .errors import (
    ConfigError,
    DuplicateRatingError,
    ParseError,
    RatingRangeError,
    ValidationError,
)

RATINGS_HEADER = ("user_id", "item_id", "rating")
EVENTS_HEADER = ("user_id", "item_id", "event_type", "timestamp")


def jaccard(a: frozenset | set, b: frozenset | set) -> float:
    """Set similarity |A n B| / |A u B|, defined as 0.0 when both sets are empty."""
    if not a and not b:
        return 0.0
    inter = len(a & b)
    return inter / (len(a) + len(b) - inter)


@dataclass(frozen=True)
class RatingMatrix:
    """Sparse user-item rating matrix for one domain.

    ``entries`` maps (user_id, item_id) to an integer rating in 1..k.
    The mapping is never mutated after construction.
    """

    domain_id: str
    k: int
    entries: Mapping[tuple[str, str], int]
    _by_user: dict[str, dict[str, int]] = field(
        init=False, repr=False, compare=False, default_factory=dict
    )

    def __post_init__(self) -> None:
        if self.k < 1:
            raise ValidationError(f"domain {self.domain_id!r}: k must be >= 1, got {self.k}")
        by_user: dict[str, dict[str, int]] = {}
        for (user_id, item_id), rating in self.entries.items():
            if not isinstance(rating, int) or isinstance(rating, bool):
                raise ValidationError(
                    f"domain {self.domain_id!r}: rating for ({user_id}, {item_id}) "
                    f"is not an integer: {rating!r}"
                )
            if not 1 <= rating <= self.k:
                raise RatingRangeError(
                    f"domain {self.domain_id!r}: rating {rating} for "
                    f"({user_id}, {item_id}) outside 1..{self.k}"
                )
            by_user.setdefault(user_id, {})[item_id] = rating
        object.__setattr__(self, "_by_user", by_user)

    def __len__(self) -> int:
        return len(self.entries)

    def users(self) -> frozenset[str]:
        return frozenset(self._by_user)

    def items(self) -> frozenset[str]:
        return frozenset(item for _, item in self.entries)

    def ratings_of_user(self, user_id: str) -> dict[str, int]:
        """Item -> rating map for one user.  Callers must not mutate it."""
        return self._by_user.get(user_id, {})

    def restrict_users(self, users: Iterable[str]) -> "RatingMatrix":
        """New matrix holding only the ratings of the given users."""
        keep = set(users)
        entries = {
            (u, i): r for (u, i), r in self.entries.items() if u in keep
        }
        return RatingMatrix(domain_id=self.domain_id, k=self.k, entries=entries)


@dataclass(frozen=True)
class ContentCatalog:
    """Fixed-length content feature vectors for the items of one domain."""

    domain_id: str
    feature_names: tuple[str, ...]
    features: Mapping[str, tuple[float, ...]]

    def __post_init__(self) -> None:
        dim = len(self.feature_names)
        if dim == 0:
            raise ValidationError(f"domain {self.domain_id!r}: catalog has no feature columns")
        for item_id, vector in self.features.items():
            if len(vector) != dim:
                raise ValidationError(
                    f"domain {self.domain_id!r}: item {item_id!r} has "
                    f"{len(vector)} features, expected {dim}"
                )

    @property
    def dimension(self) -> int:
        return len(self.feature_names)

    def __contains__(self, item_id: str) -> bool:
        return item_id in self.features

    def vector(self, item_id: str) -> tuple[float, ...]:
        try:
            return self.features[item_id]
        except KeyError:
            raise ValidationError(
                f"domain {self.domain_id!r}: no content vector for item {item_id!r}"
            ) from None

    def require_items(self, item_ids: Iterable[str]) -> None:
        """Fail loudly if any of the given items lacks a content vector."""
        missing = sorted(set(item_ids) - set(self.features))
        if missing:
            raise ValidationError(
                f"domain {self.domain_id!r}: no content vector for item {missing[0]!r}"
                + (f" and {len(missing) - 1} more" if len(missing) > 1 else "")
            )

    def item_ids(self) -> list[str]:
        return sorted(self.features)


@dataclass(frozen=True)
class EventRecord:
    user_id: str
    item_id: str
    event_type: str
    timestamp: str | None = None


@dataclass(frozen=True)
class EventLog:
    """Implicit-feedback events, optionally timestamped (ISO-8601 strings)."""

    records: tuple[EventRecord, ...]


def _read_rows(path: str, expected_header: tuple[str, ...], allow_short_header: int = 0):
    """Yield (line_number, row) pairs after validating the header line."""
    with open(path, newline="", encoding="utf-8") as handle:
        reader = csv.reader(handle)
        header = next(reader, None)
        if header is None:
            raise ParseError(f"{path}: file is empty, expected header "
                             f"{','.join(expected_header)}")
        accepted = [list(expected_header)]
        if allow_short_header:
            accepted.append(list(expected_header[:-allow_short_header]))
        if header not in accepted:
            raise ParseError(
                f"{path}: line 1: expected header {','.join(expected_header)}, "
                f"got {','.join(header)}"
            )
        for line_number, row in enumerate(reader, start=2):
            if not row:
                continue
            yield line_number, row


def ingest_ratings(path: str, k: int, domain_id: str = "domain") -> RatingMatrix:
    """Load a ``user_id,item_id,rating`` CSV into a validated RatingMatrix.

    Raises ParseError with a line number for malformed rows, RatingRangeError
    for ratings outside 1..k, and DuplicateRatingError for repeated pairs.
    """
    entries: dict[tuple[str, str], int] = {}
    for line_number, row in _read_rows(path, RATINGS_HEADER):
        if len(row) != 3 or not row[0] or not row[1]:
            raise ParseError(f"{path}: line {line_number}: expected 3 fields "
                             f"user_id,item_id,rating, got {row!r}")
        try:
            rating = int(row[2])
        except ValueError:
            raise ParseError(
                f"{path}: line {line_number}: rating {row[2]!r} is not an integer"
            ) from None
        if not 1 <= rating <= k:
            raise RatingRangeError(
                f"{path}: line {line_number}: rating {rating} outside 1..{k}"
            )
        key = (row[0], row[1])
        if key in entries:
            raise DuplicateRatingError(
                f"{path}: line {line_number}: duplicate rating for user "
                f"{row[0]!r}, item {row[1]!r}"
            )
        entries[key] = rating
    return RatingMatrix(domain_id=domain_id, k=k, entries=entries)


def export_ratings(matrix: RatingMatrix, path: str) -> None:
    """Write the matrix so that ingest_ratings reproduces it exactly."""
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(RATINGS_HEADER)
        for (user_id, item_id) in sorted(matrix.entries):
            writer.writerow([user_id, item_id, matrix.entries[(user_id, item_id)]])


def ingest_content(path: str, domain_id: str = "domain") -> ContentCatalog:
    """Load an ``item_id,f1,...,fn`` CSV of float feature vectors."""
    features: dict[str, tuple[float, ...]] = {}
    feature_names: tuple[str, ...] = ()
    with open(path, newline="", encoding="utf-8") as handle:
        reader = csv.reader(handle)
        header = next(reader, None)
        if header is None or len(header) < 2 or header[0] != "item_id":
            raise ParseError(
                f"{path}: line 1: expected header item_id,f1,...,fn, got "
                f"{','.join(header) if header else '<empty>'}"
            )
        feature_names = tuple(header[1:])
        for line_number, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header) or not row[0]:
                raise ParseError(
                    f"{path}: line {line_number}: expected {len(header)} fields, "
                    f"got {len(row)}"
                )
            if row[0] in features:
                raise DuplicateRatingError(
                    f"{path}: line {line_number}: duplicate item {row[0]!r}"
                )
            try:
                vector = tuple(float(value) for value in row[1:])
            except ValueError:
                raise ParseError(
                    f"{path}: line {line_number}: non-numeric feature value in {row!r}"
                ) from None
            features[row[0]] = vector
    return ContentCatalog(domain_id=domain_id, feature_names=feature_names, features=features)


def export_content(catalog: ContentCatalog, path: str) -> None:
    """Write the catalog; float repr keeps values exact across a round trip."""
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(["item_id", *catalog.feature_names])
        for item_id in sorted(catalog.features):
            writer.writerow([item_id, *[repr(v) for v in catalog.features[item_id]]])


def ingest_events(path: str) -> EventLog:
    """Load ``user_id,item_id,event_type,timestamp`` rows; timestamp may be blank."""
    records: list[EventRecord] = []
    for line_number, row in _read_rows(path, EVENTS_HEADER, allow_short_header=1):
        if len(row) not in (3, 4) or not row[0] or not row[1] or not row[2]:
            raise ParseError(
                f"{path}: line {line_number}: expected user_id,item_id,event_type"
                f"[,timestamp], got {row!r}"
            )
        timestamp = row[3] if len(row) == 4 and row[3] else None
        records.append(EventRecord(row[0], row[1], row[2], timestamp))
    return EventLog(records=tuple(records))


def events_to_ratings(
    log: EventLog, event_weights: Mapping[str, int], k: int, domain_id: str = "domain"
) -> RatingMatrix:
    """Convert events to ratings, keeping the strongest signal per (user, item).

    A user who both viewed and bought an item ends up with the buy weight:
    repeated or mixed events aggregate with max, so conversion is idempotent
    and insensitive to event order.
    """
    for event_type, weight in event_weights.items():
        if not isinstance(weight, int) or isinstance(weight, bool) or not 1 <= weight <= k:
            raise ConfigError(
                f"event_weights[{event_type!r}] = {weight!r} is not an integer in 1..{k}"
            )
    entries: dict[tuple[str, str], int] = {}
    for record in log.records:
        if record.event_type not in event_weights:
            raise ConfigError(
                f"event_weights has no entry for event type {record.event_type!r}"
            )
        key = (record.user_id, record.item_id)
        weight = event_weights[record.event_type]
        if weight > entries.get(key, 0):
            entries[key] = weight
    return RatingMatrix(domain_id=domain_id, k=k, entries=entries)
