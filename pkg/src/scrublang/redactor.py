"""Streaming keystroke-log redaction with two-stage rollback.

Keystroke loggers store a text field one snapshot per keystroke, including
deletions and autocorrect replacements, so sensitive strings exist in the log
as partial fragments long before they are complete enough to match any known
PII format.  This module consumes those snapshots and produces sanitized
entries in which no retained string leaks a fragment of detectable PII:

* on every snapshot, in-progress tails that could still become PII are tagged
  provisionally (via the detector suite's prefix awareness);
* stage 1 — whenever a token is completed at the end of the string, the real
  detection outcome for that token (a confirmed span, or nothing) is rolled
  back through every earlier snapshot of the token, clearing provisional tags
  the completed token disproved;
* stage 2 — when the whole entry is complete, the full-string detections are
  overlaid onto every retained snapshot; where an earlier provisional span
  only partially overlaps a final span, the labels merge into a compound tag
  such as ``<date|phone>``.

Entries from password or phone-number fields are dropped structurally: only a
single ``<password>`` / ``<phone>`` placeholder survives.

State is per stream (one ``(user_id, app_id)`` pair); distinct streams may be
fed from different threads, a single stream must not.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from .detectors import DetectorSuite, default_suite
from .spans import RedactionSpan, clip_spans, merge_spans, render_redacted

DEFAULT_BOUNDARY_CHARS = " \t\n\r.,!?;:"
DEFAULT_TIMEOUT_MS = 60_000

STRUCTURAL_PASSWORD = "password"
STRUCTURAL_PHONE = "phone"


class RedactionError(Exception):
    pass


class OutOfOrderError(RedactionError):
    """Event timestamp precedes the stream's last seen timestamp."""


class EmptyBufferError(RedactionError):
    """Finalization was requested for a buffer holding no content."""


@dataclass(frozen=True)
class KeystrokeEvent:
    """One logged snapshot of a text field (after one keystroke/edit).

    ``current_text`` is the full field contents, not a delta; successive
    events for a stream may differ by an arbitrary edit.
    """

    user_id: str
    timestamp: int
    app_id: str
    current_text: str
    is_password: bool = False
    is_phone_field: bool = False

    @classmethod
    def from_json(cls, line: str) -> "KeystrokeEvent":
        d = json.loads(line)
        return cls(
            user_id=str(d["user_id"]),
            timestamp=int(d["timestamp"]),
            app_id=str(d["app_id"]),
            current_text=str(d["current_text"]),
            is_password=bool(d.get("is_password", False)),
            is_phone_field=bool(d.get("is_phone_field", False)),
        )

    def to_dict(self) -> dict:
        return {
            "user_id": self.user_id,
            "timestamp": self.timestamp,
            "app_id": self.app_id,
            "current_text": self.current_text,
            "is_password": self.is_password,
            "is_phone_field": self.is_phone_field,
        }


@dataclass
class _Snapshot:
    """One retained partial string with its provisional annotation.

    ``confirmed`` spans are complete detector matches on this text;
    ``hypotheses`` mark tails that could still have grown into a match at the
    time the snapshot was taken.  The rollback stages confirm, extend, or
    clear these before anything is rendered.
    """

    timestamp: int
    text: str
    confirmed: list[RedactionSpan]
    hypotheses: list[RedactionSpan]


@dataclass
class EntryBuffer:
    """Accumulates one in-progress entry for a stream.

    ``history`` is append-only until finalization empties it; each snapshot's
    annotation is provisional until the rollback stages confirm or clear it.
    ``token_boundary`` is the offset where the last completed token ends in
    the newest snapshot.
    """

    user_id: str
    app_id: str
    history: list[_Snapshot] = field(default_factory=list)
    structural_tag: str | None = None
    structural_seen: bool = False
    last_timestamp: int | None = None
    token_boundary: int = 0

    @property
    def has_content(self) -> bool:
        return self.structural_seen or any(s.text for s in self.history)

    def reset(self) -> None:
        self.history.clear()
        self.structural_tag = None
        self.structural_seen = False
        self.token_boundary = 0


@dataclass(frozen=True)
class SanitizedEntry:
    """A completed, redacted entry.

    ``snapshots`` (present only when snapshot retention is on) are the
    redacted partial strings; for password/phone fields both the text and the
    snapshots are replaced by a single structural placeholder.
    ``spans`` locate the placeholders within ``final_text``.
    """

    user_id: str
    app_id: str
    start_timestamp: int
    end_timestamp: int
    final_text: str
    spans: tuple[RedactionSpan, ...]
    snapshots: tuple[str, ...] = ()

    def to_dict(self) -> dict:
        return {
            "user_id": self.user_id,
            "app_id": self.app_id,
            "start_timestamp": self.start_timestamp,
            "end_timestamp": self.end_timestamp,
            "final_text": self.final_text,
            "spans": [s.to_dict() for s in self.spans],
            "snapshots": list(self.snapshots),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), ensure_ascii=False, sort_keys=True)


@dataclass(frozen=True)
class RedactionResult:
    """Output of whole-string redaction: text with placeholders, and where
    the placeholders sit within it."""

    text: str
    spans: tuple[RedactionSpan, ...]


def detect_token_completion(
    previous_text: str, current_text: str, boundary_chars: str = DEFAULT_BOUNDARY_CHARS
) -> tuple[int, int] | None:
    """Range of the token newly completed at the end of ``current_text``.

    A token completes when the edit leaves the string ending in one or more
    boundary characters directly after non-boundary characters, and that
    token/boundary pair was not already present in ``previous_text``.
    Replacement edits (autocorrect) count as delete-then-append.  Returns the
    half-open character range of the completed token, or ``None``.
    """
    if not current_text or current_text[-1] not in boundary_chars:
        return None
    # last non-boundary character
    p = len(current_text) - 1
    while p >= 0 and current_text[p] in boundary_chars:
        p -= 1
    if p < 0:
        return None
    start = p
    while start > 0 and current_text[start - 1] not in boundary_chars:
        start -= 1
    # newly completed iff the edit touched the token or its boundary
    lcp = 0
    limit = min(len(previous_text), len(current_text))
    while lcp < limit and previous_text[lcp] == current_text[lcp]:
        lcp += 1
    if lcp >= p + 2:
        return None  # token + boundary already existed before this edit
    return (start, p + 1)


class StreamRedactor:
    """Incremental keystroke redactor (see module docstring for the protocol).

    Args:
        suite: Detector suite; defaults to the bundled catalogue + gazetteer.
        timeout_ms: Inactivity gap that finalizes the open entry.
        keep_snapshots: Retain redacted partial snapshots on emitted entries.
        boundary_chars: Token boundary set.
    """

    def __init__(
        self,
        suite: DetectorSuite | None = None,
        timeout_ms: int = DEFAULT_TIMEOUT_MS,
        keep_snapshots: bool = False,
        boundary_chars: str = DEFAULT_BOUNDARY_CHARS,
    ) -> None:
        self.suite = suite if suite is not None else default_suite()
        self.timeout_ms = timeout_ms
        self.keep_snapshots = keep_snapshots
        self.boundary_chars = boundary_chars
        self._buffers: dict[tuple[str, str], EntryBuffer] = {}

    # -- event ingestion -------------------------------------------------

    def ingest_event(self, event: KeystrokeEvent) -> list[SanitizedEntry]:
        """Feed one event; return any entries this event completed."""
        key = (event.user_id, event.app_id)
        buf = self._buffers.get(key)
        if buf is None:
            buf = self._buffers[key] = EntryBuffer(event.user_id, event.app_id)
        if buf.last_timestamp is not None and event.timestamp < buf.last_timestamp:
            raise OutOfOrderError(
                f"stream {key}: timestamp {event.timestamp} precedes {buf.last_timestamp}"
            )

        completed: list[SanitizedEntry] = []
        if (
            buf.has_content
            and buf.last_timestamp is not None
            and event.timestamp - buf.last_timestamp > self.timeout_ms
        ):
            completed.append(self._finalize(buf))

        buf.last_timestamp = event.timestamp

        if event.is_password or event.is_phone_field:
            # Structural PII: never retain the text, only remember the field kind.
            buf.structural_tag = STRUCTURAL_PASSWORD if event.is_password else STRUCTURAL_PHONE
            if event.current_text:
                buf.structural_seen = True
            elif buf.has_content:  # field cleared -> entry complete
                completed.append(self._finalize(buf))
            return completed

        if event.current_text == "":
            if buf.has_content:
                completed.append(self._finalize(buf))
            return completed

        prev_text = buf.history[-1].text if buf.history else ""
        if event.current_text == prev_text:
            return completed  # cursor movement etc.; nothing new to record

        snapshot = _Snapshot(
            timestamp=event.timestamp,
            text=event.current_text,
            confirmed=self.suite.detect(event.current_text),
            hypotheses=self.suite.partial_at_end(event.current_text),
        )
        buf.history.append(snapshot)

        token = detect_token_completion(prev_text, event.current_text, self.boundary_chars)
        if token is not None:
            detections = [
                s for s in snapshot.confirmed if s.start < token[1] and s.end > token[0]
            ]
            self.rollback_stage1(buf, token, detections)
        return completed

    def finish(self) -> list[SanitizedEntry]:
        """Finalize all open buffers (end of stream)."""
        entries = []
        for key in sorted(self._buffers):
            buf = self._buffers[key]
            if buf.has_content:
                entries.append(self._finalize(buf))
        return entries

    # -- stage 1: token-completion rollback -------------------------------

    def rollback_stage1(
        self,
        buf: EntryBuffer,
        token: tuple[int, int],
        detections: list[RedactionSpan],
    ) -> None:
        """Roll a completed token's detection outcome back through the buffer.

        Every retained snapshot that shares the text up to the token start
        receives the real detections, clipped to its own length, so any prefix
        of a detected region it contains is covered by the same tag.  On
        snapshots that are true typing prefixes of the current string the
        completed token also *resolves* the provisional tail hypotheses: they
        are cleared whether the detectors confirmed them or not (the "or lack
        thereof" branch).  Snapshots holding diverging content (deleted or
        autocorrected away) keep their hypotheses, since the completed token
        proves nothing about text that is no longer part of it.
        """
        if not buf.history:
            return
        start, end = token
        cur = buf.history[-1].text
        for snap in buf.history:
            n = len(snap.text)
            if n <= start or snap.text[:start] != cur[:start]:
                continue
            snap.confirmed = merge_spans(snap.confirmed + clip_spans(detections, n))
            if snap.text == cur[:n]:
                snap.hypotheses = []
        buf.token_boundary = end

    # -- stage 2: entry finalization --------------------------------------

    def _finalize(self, buf: EntryBuffer) -> SanitizedEntry:
        entry = self.finalize_entry(buf)
        buf.reset()
        return entry

    def finalize_entry(self, buf: EntryBuffer) -> SanitizedEntry:
        """Finalize the buffer's entry (stage-2 rollback) without resetting it.

        Full-string detections become placeholders in the final text and are
        overlaid on every retained snapshot.  Snapshots that are prefixes of
        the final string are adjudicated by it: final spans apply clipped, and
        where a snapshot's own confirmed span partially overlaps a final span
        the tags merge into a compound tag; everything the final string proves
        clean is left readable.  Diverged snapshots keep their provisional
        annotation and are conservatively re-scanned, because the final string
        cannot vouch for content that was edited away (this can over-redact
        deleted fragments; that is the safe direction).
        """
        if not buf.has_content:
            raise EmptyBufferError(f"stream ({buf.user_id}, {buf.app_id}): nothing to finalize")
        first_ts = buf.history[0].timestamp if buf.history else buf.last_timestamp or 0
        last_ts = buf.history[-1].timestamp if buf.history else buf.last_timestamp or 0

        if buf.structural_tag is not None:
            tag = buf.structural_tag
            placeholder = f"<{tag}>"
            return SanitizedEntry(
                user_id=buf.user_id,
                app_id=buf.app_id,
                start_timestamp=first_ts,
                end_timestamp=last_ts,
                final_text=placeholder,
                spans=(RedactionSpan(0, len(placeholder), (tag,)),),
                snapshots=(),
            )

        raw = buf.history[-1].text
        detections = self.suite.detect(raw)
        final_text, final_spans = render_redacted(raw, detections)

        snapshots_out: list[str] = []
        if self.keep_snapshots:
            for snap in buf.history[:-1]:
                clipped = clip_spans(detections, len(snap.text))
                if snap.text == raw[: len(snap.text)]:
                    pieces = [
                        RedactionSpan(max(c.start, f.start), min(c.end, f.end), c.tags)
                        for c in snap.confirmed
                        for f in clipped
                        if c.overlaps(f)
                    ]
                    spans = merge_spans(clipped + pieces)
                else:
                    fresh = self.suite.provisional(snap.text)
                    spans = merge_spans(snap.confirmed + snap.hypotheses + clipped + fresh)
                snapshots_out.append(render_redacted(snap.text, spans)[0])

        return SanitizedEntry(
            user_id=buf.user_id,
            app_id=buf.app_id,
            start_timestamp=first_ts,
            end_timestamp=last_ts,
            final_text=final_text,
            spans=tuple(final_spans),
            snapshots=tuple(snapshots_out),
        )


def redact_string(text: str, suite: DetectorSuite | None = None) -> RedactionResult:
    """Redact a complete document (no streaming context).

    Runs the detector suite and replaces each maximal detected span with its
    tag placeholder.  Existing placeholders are left untouched, so the
    operation is idempotent.
    """
    suite = suite if suite is not None else default_suite()
    redacted, spans = render_redacted(text, suite.detect(text))
    return RedactionResult(text=redacted, spans=tuple(spans))
