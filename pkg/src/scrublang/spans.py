"""Character-range annotations and the span algebra shared by detectors and the redactor.

A :class:`RedactionSpan` marks a half-open character range ``[start, end)`` of
some string together with one or more tag labels.  Spans carrying more than one
tag are *compound* (they arise when independently detected regions only partly
overlap and their labels are merged).  All functions here keep span lists in
canonical form: non-overlapping, sorted by ``start``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

# Placeholder grammar: lowercase labels (spaces/underscores allowed) joined by
# "|" inside one angle-bracket pair, e.g. "<phone>" or "<date|phone>".
PLACEHOLDER_RE = re.compile(r"<[a-z][a-z0-9_ ]*(?:\|[a-z][a-z0-9_ ]*)*>")


@dataclass(frozen=True)
class RedactionSpan:
    """A tagged half-open character range ``[start, end)``.

    Attributes:
        start: Inclusive character index.
        end: Exclusive character index; ``start < end``.
        tags: Tag labels, sorted and deduplicated.  ``len(tags) > 1`` marks a
            compound tag.
    """

    start: int
    end: int
    tags: tuple[str, ...]

    def __post_init__(self) -> None:
        if not (0 <= self.start < self.end):
            raise ValueError(f"invalid span range [{self.start}, {self.end})")
        if not self.tags:
            raise ValueError("span must carry at least one tag")
        canon = tuple(sorted(set(self.tags)))
        if canon != self.tags:
            object.__setattr__(self, "tags", canon)

    def overlaps(self, other: RedactionSpan) -> bool:
        return self.start < other.end and other.start < self.end

    def placeholder(self) -> str:
        """Render the span's tag placeholder, e.g. ``<date|phone>``."""
        return "<" + "|".join(self.tags) + ">"

    def to_dict(self) -> dict:
        return {"start": self.start, "end": self.end, "tags": list(self.tags)}

    @classmethod
    def from_dict(cls, d: dict) -> RedactionSpan:
        return cls(int(d["start"]), int(d["end"]), tuple(d["tags"]))


def span(start: int, end: int, *tags: str) -> RedactionSpan:
    """Shorthand constructor used heavily in tests."""
    return RedactionSpan(start, end, tuple(tags))


def merge_spans(spans: list[RedactionSpan]) -> list[RedactionSpan]:
    """Merge overlapping spans into single spans with unioned tags.

    The union of two partially overlapping regions becomes one span covering
    ``[min(starts), max(ends))`` carrying both tag sets (a compound tag).
    Adjacent-but-disjoint spans are NOT merged.  Result is sorted by start.
    """
    if not spans:
        return []
    ordered = sorted(spans, key=lambda s: (s.start, s.end))
    merged: list[RedactionSpan] = [ordered[0]]
    for cur in ordered[1:]:
        prev = merged[-1]
        if cur.start < prev.end:  # overlap
            merged[-1] = RedactionSpan(
                prev.start, max(prev.end, cur.end), tuple(set(prev.tags) | set(cur.tags))
            )
        else:
            merged.append(cur)
    return merged


def clip_spans(spans: list[RedactionSpan], length: int) -> list[RedactionSpan]:
    """Clip spans to a string of ``length`` chars, dropping ones that fall out."""
    out = []
    for s in spans:
        if s.start >= length:
            continue
        out.append(RedactionSpan(s.start, min(s.end, length), s.tags))
    return out


def render_redacted(text: str, spans: list[RedactionSpan]) -> tuple[str, list[RedactionSpan]]:
    """Replace each span of ``text`` by its placeholder.

    ``spans`` must be canonical (non-overlapping, sorted).  Returns the
    redacted string plus the placeholder locations *on the redacted string*,
    so consumers can locate what was removed without seeing it.
    """
    parts: list[str] = []
    out_spans: list[RedactionSpan] = []
    cursor = 0
    out_len = 0
    for s in spans:
        parts.append(text[cursor : s.start])
        out_len += s.start - cursor
        ph = s.placeholder()
        parts.append(ph)
        out_spans.append(RedactionSpan(out_len, out_len + len(ph), s.tags))
        out_len += len(ph)
        cursor = s.end
    parts.append(text[cursor:])
    return "".join(parts), out_spans


def placeholder_regions(text: str) -> list[tuple[int, int]]:
    """Ranges of existing tag placeholders in ``text`` (not to be re-examined)."""
    return [m.span() for m in PLACEHOLDER_RE.finditer(text)]
