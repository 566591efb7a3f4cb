"""Random typing-session generator for redaction tests.

Simulates how a message reaches a keystroke logger: per-character appends,
typo-plus-backspace detours, word-level autocorrect replacements, abandoned
attempts at sensitive strings (typed partway, deleted, retyped later), and a
send (field clear) or silent end of stream.

Filler vocabulary is strictly alphabetic while every embedded PII string hits
a digit or symbol within its first three characters, so a leak check can look
for PII prefixes as plain substrings without false positives.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from scrublang.redactor import KeystrokeEvent

PHONES = ["555-123-4567", "(215) 555-0100", "555-867-5309", "+1 610 555 0199", "555-0144"]
EMAILS = ["xq9w@zmail.net", "jd7.kite@examplemail.com", "a2b@qmail.org"]
SSNS = ["987-65-4321", "123-45-6789"]
PII_POOLS = (PHONES, EMAILS, SSNS)

FILLER = (
    "hello meet me later today plans see you there coffee when are we going "
    "lunch movie sounds great sure thanks"
).split()


@dataclass
class Session:
    events: list[KeystrokeEvent]
    final_raw: str
    pii_in_final: list[str]
    cleared: bool


def leak_fragments(pii: str, min_len: int = 3) -> list[str]:
    """Prefixes of a PII string long enough to count as a leak if visible."""
    return [pii[:k] for k in range(min_len, len(pii) + 1)]


def random_session(
    rng: np.random.Generator, user: str = "u1", app: str = "sms", t0: int = 1_000_000
) -> Session:
    n_words = int(rng.integers(3, 7))
    tokens = [FILLER[rng.integers(len(FILLER))] for _ in range(n_words)]
    n_pii = 1 + int(rng.uniform() < 0.3)
    pii: list[str] = []
    for _ in range(n_pii):
        pool = PII_POOLS[rng.integers(len(PII_POOLS))]
        pii.append(pool[rng.integers(len(pool))])
    for s in pii:
        tokens.insert(int(rng.integers(0, len(tokens) + 1)), s)

    events: list[KeystrokeEvent] = []
    t = t0
    text = ""

    def emit(snapshot: str) -> None:
        nonlocal t
        t += int(rng.integers(40, 400))
        events.append(KeystrokeEvent(user, t, app, snapshot))

    def type_chars(chunk: str, allow_typos: bool) -> None:
        nonlocal text
        for ch in chunk:
            if allow_typos and text and ch.isalpha() and rng.uniform() < 0.06:
                text += "zqx"[rng.integers(3)]
                emit(text)
                text = text[:-1]
                emit(text)
            text += ch
            emit(text)

    pii_set = set(pii)
    for idx, tok in enumerate(tokens):
        is_pii = tok in pii_set
        if is_pii and rng.uniform() < 0.3:
            # abandoned attempt: part of the PII typed, deleted again, an
            # unrelated word typed, then the real thing.  Deleting back to an
            # empty field would finalize the entry, so never start at "".
            if not text:
                type_chars(FILLER[rng.integers(len(FILLER))] + " ", allow_typos=False)
            k = int(rng.integers(2, len(tok)))
            type_chars(tok[:k], allow_typos=False)
            for _ in range(k):
                text = text[:-1]
                emit(text)
            type_chars(FILLER[rng.integers(len(FILLER))] + " ", allow_typos=False)
        if not is_pii and len(tok) > 3 and rng.uniform() < 0.12:
            # autocorrect: a mangled word is replaced in a single edit
            type_chars(tok[:-2] + tok[-1], allow_typos=False)
            text = text[: len(text) - len(tok) + 1] + tok + " "
            emit(text)
        elif not is_pii and rng.uniform() < 0.08:
            # paste: the whole word arrives as one event
            text += tok + " "
            emit(text)
        else:
            type_chars(tok, allow_typos=not is_pii)
            if idx < len(tokens) - 1 or rng.uniform() < 0.5:
                type_chars(" ", allow_typos=False)

    final_raw = text
    cleared = bool(rng.uniform() < 0.6)
    if cleared:
        emit("")
    return Session(
        events=events,
        final_raw=final_raw,
        pii_in_final=[s for s in pii if s in final_raw],
        cleared=cleared,
    )


def run_session(redactor, session: Session):
    entries = []
    for ev in session.events:
        entries.extend(redactor.ingest_event(ev))
    entries.extend(redactor.finish())
    return entries
