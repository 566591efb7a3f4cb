"""Pluggable PII detector suite.

Three kinds of detectors cooperate, mirrored by their priorities:

* structural flags (priority 0) are handled upstream by the stream redactor —
  the device itself marks password/phone fields, no string matching involved;
* common data formats (priority 10) are regular expressions loaded from a
  versioned catalogue file (phones, emails, URLs, IPs, addresses, ZIPs, SSNs,
  card numbers, dates, times, prices);
* entity recognition (priority 20) is an interface; the built-in implementation
  is a gazetteer with longest-match, case-insensitive lookup plus a
  capitalization requirement for person names.

Every detector also supports *prefix awareness*: given a string that ends in
the middle of something that could still become a match (``"call 555-1"``),
the suite reports a provisional span reaching the end of the string.  This is
what lets the stream redactor tag half-typed PII before it is complete.

Overlapping matches are resolved by priority, then match length, then leftmost
position; regions already covered by a ``<tag>`` placeholder are never
re-examined.
"""

from __future__ import annotations

import importlib.resources
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Protocol

import regex

from .spans import RedactionSpan, merge_spans, placeholder_regions

PRIORITY_STRUCTURAL = 0
PRIORITY_REGEX = 10
PRIORITY_ENTITY = 20


class CatalogueError(ValueError):
    """Raised for malformed catalogue or gazetteer files."""


@dataclass(frozen=True)
class Detector:
    """A named span matcher.

    Attributes:
        name: Tag label (entity recognizers may emit spans with other labels).
        priority: Lower priority wins overlap resolution.
        matcher: Complete-match function: string -> spans within the string.
        partial_matcher: Optional prefix matcher: string -> spans that reach
            the end of the string and could still grow into a complete match.
    """

    name: str
    priority: int
    matcher: Callable[[str], list[RedactionSpan]]
    partial_matcher: Callable[[str], list[RedactionSpan]] | None = None


class EntityRecognizer(Protocol):
    """Interface for the entity-recognition stage (swap in a real NER here)."""

    def find_entities(self, text: str) -> list[RedactionSpan]: ...

    def find_partial_entities(self, text: str) -> list[RedactionSpan]: ...


def _regex_full_matches(
    pattern: regex.Pattern, label: str, min_len: int, text: str
) -> list[RedactionSpan]:
    out = []
    for m in pattern.finditer(text):
        if m.end() - m.start() >= min_len:
            out.append(RedactionSpan(m.start(), m.end(), (label,)))
    return out


def _regex_partial_at_end(pattern: regex.Pattern, label: str, text: str) -> list[RedactionSpan]:
    # Scan past complete matches; a partial match always extends to the end of
    # the string, so the leftmost one is maximal and we can stop there.  A
    # complete match can shadow a longer in-progress one from the same region
    # ("a.b@x.co" inside a half-typed "a.b@x.com..."), so starts within a
    # complete match are re-probed with fullmatch, which only succeeds
    # partially if the suffix could still grow into a match.
    out = []
    pos = 0
    n = len(text)
    while pos <= n:
        m = pattern.search(text, pos, partial=True)
        if m is None:
            break
        if m.partial:
            if m.end() > m.start():  # ignore zero-width partials
                out.append(RedactionSpan(m.start(), n, (label,)))
            break
        for start in range(m.start(), min(m.end(), n)):
            fm = pattern.fullmatch(text, start, partial=True)
            if fm is not None and fm.partial and n > start:
                out.append(RedactionSpan(start, n, (label,)))
                return out
        pos = max(m.end(), m.start() + 1)
    return out


def regex_detector(label: str, pattern: str, min_len: int = 1) -> Detector:
    """Build a common-format detector from one catalogue entry."""
    compiled = regex.compile(pattern)
    return Detector(
        name=label,
        priority=PRIORITY_REGEX,
        matcher=lambda text: _regex_full_matches(compiled, label, min_len, text),
        partial_matcher=lambda text: _regex_partial_at_end(compiled, label, text),
    )


def load_catalogue(path: str | Path | None = None) -> list[Detector]:
    """Load regex detectors from a TSV catalogue (``label<TAB>pattern[<TAB>min_len]``).

    ``None`` loads the bundled default catalogue.
    """
    if path is None:
        text = (
            importlib.resources.files("scrublang").joinpath("data/regex_catalogue.tsv").read_text()
        )
    else:
        text = Path(path).read_text(encoding="utf-8")
    detectors = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.rstrip("\n")
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) not in (2, 3):
            raise CatalogueError(f"catalogue line {lineno}: expected 2 or 3 tab-separated fields")
        label, pattern = parts[0].strip(), parts[1]
        min_len = int(parts[2]) if len(parts) == 3 else 1
        try:
            detectors.append(regex_detector(label, pattern, min_len))
        except regex.error as exc:
            raise CatalogueError(f"catalogue line {lineno}: bad pattern: {exc}") from exc
    return detectors


class Gazetteer:
    """Label -> case-folded surface forms, with longest-match lookup.

    Surface forms may span several words.  Labels listed in
    ``require_capitalized`` (person names by default) only match when every
    word of the occurrence is capitalized in the original text, which keeps
    common nouns from being swallowed just because they appear in a name list.
    """

    def __init__(
        self,
        entries: dict[str, Iterable[str]] | None = None,
        require_capitalized: frozenset[str] = frozenset({"person"}),
    ) -> None:
        self.entries: dict[str, set[str]] = {}
        self.require_capitalized = require_capitalized
        for label, forms in (entries or {}).items():
            for form in forms:
                self.add(label, form)

    def add(self, label: str, surface: str) -> None:
        surface = " ".join(surface.casefold().split())
        if not surface:
            raise CatalogueError(f"empty gazetteer surface form for label {label!r}")
        self.entries.setdefault(label, set()).add(surface)

    @classmethod
    def from_file(cls, path: str | Path) -> "Gazetteer":
        gaz = cls()
        for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
            if not line.strip() or line.lstrip().startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) != 2:
                raise CatalogueError(f"gazetteer line {lineno}: expected label<TAB>surface form")
            gaz.add(parts[0].strip(), parts[1])
        return gaz

    @classmethod
    def bundled_sample(cls) -> "Gazetteer":
        gaz = cls()
        text = (
            importlib.resources.files("scrublang").joinpath("data/sample_gazetteer.tsv").read_text()
        )
        for line in text.splitlines():
            if not line.strip() or line.lstrip().startswith("#"):
                continue
            label, surface = line.split("\t")
            gaz.add(label.strip(), surface)
        return gaz

    # -- matching ------------------------------------------------------

    def _word_runs(self, text: str) -> list[tuple[int, int]]:
        return [m.span() for m in regex.finditer(r"[\w'][\w'.-]*", text)]

    def _capitalized_ok(self, label: str, text: str, start: int) -> bool:
        if label not in self.require_capitalized:
            return True
        # every word of the occurrence must start uppercase
        occ_words = regex.finditer(r"[\w'][\w'.-]*", text[start:])
        return all(w.group()[0].isupper() for w in occ_words)

    def find_entities(self, text: str) -> list[RedactionSpan]:
        folded = text.casefold()
        words = self._word_runs(text)
        spans: list[RedactionSpan] = []
        for i, (start, _) in enumerate(words):
            best: tuple[int, str] | None = None
            for label, forms in sorted(self.entries.items()):
                for form in forms:
                    end = start + len(form)
                    if folded[start:end] != form:
                        continue
                    if end < len(text) and (text[end].isalnum() or text[end] == "_"):
                        continue  # must end at a word boundary
                    if not self._capitalized_ok(label, text[:end], start):
                        continue
                    if best is None or end > best[0]:
                        best = (end, label)
            if best is not None:
                spans.append(RedactionSpan(start, best[0], (best[1],)))
        # longest-match may produce nested/overlapping hits from successive
        # word starts; keep the earliest-longest ones
        resolved: list[RedactionSpan] = []
        for s in sorted(spans, key=lambda s: (-(s.end - s.start), s.start)):
            if not any(s.overlaps(r) for r in resolved):
                resolved.append(s)
        return sorted(resolved, key=lambda s: s.start)

    def find_partial_entities(self, text: str) -> list[RedactionSpan]:
        """Spans where the tail of ``text`` is a proper prefix of some entry."""
        folded = text.casefold()
        spans = []
        for label, forms in sorted(self.entries.items()):
            best_start: int | None = None
            for form in forms:
                max_l = min(len(form) - 1, len(text))
                for l in range(max_l, 0, -1):
                    start = len(text) - l
                    if folded[start:] != form[:l]:
                        continue
                    if start > 0 and (text[start - 1].isalnum() or text[start - 1] == "_"):
                        continue  # must begin at a word boundary
                    if not self._capitalized_ok(label, text, start):
                        continue
                    if best_start is None or start < best_start:
                        best_start = start
                    break
            if best_start is not None and best_start < len(text):
                spans.append(RedactionSpan(best_start, len(text), (label,)))
        return spans


def entity_detector(recognizer: EntityRecognizer, name: str = "entity") -> Detector:
    return Detector(
        name=name,
        priority=PRIORITY_ENTITY,
        matcher=recognizer.find_entities,
        partial_matcher=recognizer.find_partial_entities,
    )


class DetectorSuite:
    """An ordered collection of detectors with overlap resolution.

    Immutable after construction; safe to share across threads.
    """

    def __init__(self, detectors: Iterable[Detector]):
        self.detectors = tuple(detectors)

    @classmethod
    def default(
        cls,
        catalogue_path: str | Path | None = None,
        gazetteer: Gazetteer | None = None,
    ) -> "DetectorSuite":
        dets = load_catalogue(catalogue_path)
        gaz = gazetteer if gazetteer is not None else Gazetteer.bundled_sample()
        dets.append(entity_detector(gaz))
        return cls(dets)

    def detect(self, text: str) -> list[RedactionSpan]:
        """All complete matches, resolved to a non-overlapping sorted list.

        Resolution order: detector priority, then longest match, then leftmost,
        then tag name (so permuting same-priority detectors cannot change the
        result).  Existing placeholders in the text are masked out first.
        """
        if not text:
            return []
        masked = placeholder_regions(text)
        candidates: list[tuple[int, int, int, str, RedactionSpan]] = []
        for det in self.detectors:
            for s in det.matcher(text):
                if any(s.start < mend and mstart < s.end for mstart, mend in masked):
                    continue
                candidates.append((det.priority, -(s.end - s.start), s.start, det.name, s))
        candidates.sort(key=lambda c: c[:4])
        accepted: list[RedactionSpan] = []
        for _, _, _, _, s in candidates:
            if not any(s.overlaps(a) for a in accepted):
                accepted.append(s)
        return sorted(accepted, key=lambda s: s.start)

    def partial_at_end(self, text: str) -> list[RedactionSpan]:
        """Spans whose text could still grow into a complete match."""
        if not text:
            return []
        spans: list[RedactionSpan] = []
        for det in self.detectors:
            if det.partial_matcher is not None:
                spans.extend(det.partial_matcher(text))
        return merge_spans(spans)

    def provisional(self, text: str) -> list[RedactionSpan]:
        """Complete matches plus in-progress tails, merged.

        This is what a partial keystroke snapshot gets tagged with before the
        surrounding token or entry is finished.
        """
        return merge_spans(self.detect(text) + self.partial_at_end(text))

    def possible_prefix(self, text: str) -> bool:
        """True when the string could be a prefix of (or already contain at its
        end) something a detector matches.

        Never returns False for a true prefix of a matchable string; it may
        return True for strings that will never complete (over-approximation
        is the safe direction).
        """
        if not text:
            return True
        return any(s.end == len(text) for s in self.provisional(text))


_default_suite: DetectorSuite | None = None
_format_suite: DetectorSuite | None = None


def default_suite() -> DetectorSuite:
    """Shared default suite (bundled catalogue + sample gazetteer)."""
    global _default_suite
    if _default_suite is None:
        _default_suite = DetectorSuite.default()
    return _default_suite


def match_common_formats(text: str) -> list[RedactionSpan]:
    """Common-data-format matches only (bundled regex catalogue, no entity
    recognition): phones, emails, URLs, IPs, street addresses, ZIPs, SSNs,
    card numbers, dates, times, prices."""
    global _format_suite
    if _format_suite is None:
        _format_suite = DetectorSuite(load_catalogue())
    return _format_suite.detect(text)
