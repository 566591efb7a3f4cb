"""Tokenization, 1-to-3-gram frequencies, and dictionary-category extraction.

The tokenizer is tuned for informal message text: it lowercases, keeps
emoticons (":)") and contractions ("i'll") intact, treats redaction
placeholders ("<email>", "<date|phone>") as single tokens, and splits
ordinary punctuation into its own tokens.  It is fixture-tested rather than a
byte-exact clone of any particular social-media tokenizer.

N-gram frequencies are relative per order: each n-gram count is divided by
the total number of n-grams of that order, so the values for one user and one
order sum to 1.  N-grams never cross document boundaries.

Dictionary extraction counts tokens matching category entries; an entry is a
literal token or a prefix wildcard ("happ*", star only in terminal position).
"""

from __future__ import annotations

import json
import re
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

PLATFORM_FACEBOOK = "facebook"
PLATFORM_SMS = "sms"
PLATFORMS = (PLATFORM_FACEBOOK, PLATFORM_SMS)

DEFAULT_MIN_WORDS = 500
DEFAULT_MIN_GROUP_FRACTION = 0.05

# token grammar, tried in order: placeholder, emoticon, word w/ contractions,
# hashtag/mention, number, any other non-space char
_TOKEN_RE = re.compile(
    r"""
    <[a-z][a-z0-9_ ]*(?:\|[a-z][a-z0-9_ ]*)*>   # redaction placeholder
    | [<>]?[:;=8xX][\-o^']?[()\[\]dDpP/\\|*3{}] # emoticon, western style
    | <3                                        # heart
    | [#@][a-z0-9_]+                            # hashtag / mention
    | [a-z0-9]+(?:'[a-z0-9]+)*                  # word, contractions intact
    | \S                                        # any lone symbol
    """,
    re.VERBOSE,
)

_PLACEHOLDER_TOKEN_RE = re.compile(r"<[a-z][a-z0-9_ ]*(?:\|[a-z][a-z0-9_ ]*)*>\Z")


class DictionaryError(ValueError):
    """Raised for malformed dictionary specs (e.g. internal wildcard)."""


def tokenize(text: str) -> list[str]:
    """Lowercased tokens; see module docstring for what stays intact."""
    lowered = text.lower().replace("’", "'")
    return _TOKEN_RE.findall(lowered)


def is_placeholder_token(token: str) -> bool:
    return _PLACEHOLDER_TOKEN_RE.match(token) is not None


def _as_documents(tokens: Sequence) -> list[list[str]]:
    if tokens and isinstance(tokens[0], str):
        return [list(tokens)]
    return [list(doc) for doc in tokens]


def ngram_counts(
    tokens: Sequence, orders: Iterable[int] = (1, 2, 3)
) -> tuple[Counter, dict[int, int]]:
    """Raw n-gram counts and per-order totals.

    ``tokens`` is either one document (sequence of str) or a sequence of
    documents; n-grams never span document boundaries.  N-gram feature ids are
    the tokens joined by single spaces.
    """
    docs = _as_documents(tokens)
    counts: Counter = Counter()
    totals: dict[int, int] = {n: 0 for n in orders}
    for doc in docs:
        for n in totals:
            for i in range(len(doc) - n + 1):
                counts[" ".join(doc[i : i + n])] += 1
                totals[n] += 1
    return counts, totals


def extract_ngrams(tokens: Sequence, orders: Iterable[int] = (1, 2, 3)) -> dict[str, float]:
    """Relative n-gram frequencies (count / total n-grams of that order)."""
    counts, totals = ngram_counts(tokens, orders)
    out: dict[str, float] = {}
    for gram, c in counts.items():
        n = gram.count(" ") + 1
        out[gram] = c / totals[n]
    return out


@dataclass
class DictionarySpec:
    """A named category lexicon with literal and prefix-wildcard entries."""

    categories: dict[str, list[str]]
    _literals: dict[str, frozenset[str]] = field(init=False, repr=False)
    _prefixes: dict[str, tuple[str, ...]] = field(init=False, repr=False)

    def __post_init__(self) -> None:
        self._literals = {}
        self._prefixes = {}
        for cat, entries in self.categories.items():
            lits, prefs = set(), []
            for entry in entries:
                entry = entry.strip().lower()
                if not entry:
                    raise DictionaryError(f"category {cat!r}: empty entry")
                star = entry.find("*")
                if star == -1:
                    lits.add(entry)
                elif star == len(entry) - 1 and star > 0:
                    prefs.append(entry[:-1])
                else:
                    raise DictionaryError(
                        f"category {cat!r}: wildcard must be terminal in {entry!r}"
                    )
            self._literals[cat] = frozenset(lits)
            self._prefixes[cat] = tuple(sorted(prefs))

    @classmethod
    def from_file(cls, path: str | Path) -> "DictionarySpec":
        """Parse "[category]" header lines followed by one entry per line."""
        categories: dict[str, list[str]] = {}
        current: str | None = None
        for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if line.startswith("[") and line.endswith("]"):
                current = line[1:-1].strip()
                if not current:
                    raise DictionaryError(f"line {lineno}: empty category name")
                categories.setdefault(current, [])
            elif current is None:
                raise DictionaryError(f"line {lineno}: entry before any [category] header")
            else:
                categories[current].append(line)
        return cls(categories)

    def matches(self, token: str, category: str) -> bool:
        if token in self._literals[category]:
            return True
        return any(token.startswith(p) for p in self._prefixes[category])


def extract_dictionary(tokens: Sequence, spec: DictionarySpec) -> dict[str, float]:
    """Per-category relative frequencies (matching tokens / total tokens).

    A token matching several categories counts once in each; an empty token
    list yields 0 for every category.
    """
    docs = _as_documents(tokens)
    flat = [t for doc in docs for t in doc]
    total = len(flat)
    out = {cat: 0 for cat in spec.categories}
    for tok in flat:
        for cat in spec.categories:
            if spec.matches(tok, cat):
                out[cat] += 1
    return {cat: (c / total if total else 0.0) for cat, c in out.items()}


@dataclass
class UserCorpus:
    """Per-user, per-platform collection of sanitized documents."""

    user_id: str
    platform: str
    documents: list[str] = field(default_factory=list)
    metadata: dict = field(default_factory=dict)

    def token_documents(self) -> list[list[str]]:
        return [tokenize(doc) for doc in self.documents]

    def word_count(self) -> int:
        return sum(len(toks) for toks in self.token_documents())

    def ngram_features(self, orders: Iterable[int] = (1, 2, 3)) -> dict[str, float]:
        return extract_ngrams(self.token_documents(), orders)

    def dictionary_features(self, spec: DictionarySpec) -> dict[str, float]:
        return extract_dictionary(self.token_documents(), spec)


def load_corpus_jsonl(path: str | Path) -> dict[tuple[str, str], UserCorpus]:
    """Load ``{user_id, platform, text}`` JSON lines into per-(user, platform) corpora."""
    corpora: dict[tuple[str, str], UserCorpus] = {}
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        if not line.strip():
            continue
        try:
            d = json.loads(line)
            key = (str(d["user_id"]), str(d["platform"]))
            text = str(d["text"])
        except (json.JSONDecodeError, KeyError) as exc:
            raise ValueError(f"{path}:{lineno}: bad corpus record: {exc}") from exc
        corpus = corpora.get(key)
        if corpus is None:
            corpus = corpora[key] = UserCorpus(user_id=key[0], platform=key[1])
        corpus.documents.append(text)
    return corpora


def filter_min_words(
    corpora: Mapping[tuple[str, str], UserCorpus], min_words: int = DEFAULT_MIN_WORDS
) -> tuple[dict[tuple[str, str], UserCorpus], dict[str, int]]:
    """Drop users whose total word count across platforms is below ``min_words``.

    Returns the retained corpora and an exclusion log of user -> word count.
    """
    totals: dict[str, int] = {}
    for (user, _), corpus in corpora.items():
        totals[user] = totals.get(user, 0) + corpus.word_count()
    excluded = {u: c for u, c in totals.items() if c < min_words}
    kept = {k: v for k, v in corpora.items() if k[0] not in excluded}
    return kept, excluded


def user_feature_table(
    corpora: Mapping[tuple[str, str], UserCorpus],
    platform: str,
    orders: Iterable[int] = (1, 2, 3),
) -> dict[str, dict[str, float]]:
    """user_id -> n-gram relative-frequency vector for one platform."""
    return {
        user: corpus.ngram_features(orders)
        for (user, plat), corpus in sorted(corpora.items())
        if plat == platform
    }


def group_frequency_filter(
    vectors: Mapping[str, Mapping[str, float]],
    min_fraction: float = DEFAULT_MIN_GROUP_FRACTION,
) -> list[str]:
    """Features used by at least ``min_fraction`` of users, sorted.

    Standard differential-language practice: rare n-grams carry no stable
    signal and blow up the test count.
    """
    n_users = len(vectors)
    if n_users == 0:
        return []
    used_by: Counter = Counter()
    for vec in vectors.values():
        for feat, freq in vec.items():
            if freq > 0:
                used_by[feat] += 1
    return sorted(f for f, c in used_by.items() if c >= min_fraction * n_users)
