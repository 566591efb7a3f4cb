"""Deterministic synthetic fixture: a small cohort of users who message on two
platforms, with planted platform-language differences, outcome-linked word
use, keystroke logs (typos, deletions, embedded PII, password fields), a
dictionary, a pretrained-style lexicon, and embedding files.

Everything is a pure function of the seed, which is what makes byte-identical
pipeline reruns testable.  ``python -m scrublang.synth OUTDIR`` writes the
bundled 20-user fixture.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

ALLOWED_APPS = (
    "com.google.android.apps.messaging",
    "com.samsung.android.messaging",
    "com.verizon.messaging.vzmsgs",
)
OTHER_APP = "com.example.browser"

FB_WORDS = (
    "fun weekend play love good happy family party trip beach friends photos "
    "proud sunshine concert garden holiday"
).split()
SMS_WORDS = (
    "ok yes yeah you your u can want thanks tell when meet soon pick home "
    "here running late"
).split()
COMMON_WORDS = (
    "the a my this is have be was to and day all some more we going see it "
    "that with for just now really about time"
).split()
SAD_WORDS = "sad tired alone worried down".split()
CALM_WORDS = "calm rested cheerful grateful content".split()

PHONE_POOL = ("555-867-5309", "(215) 555-0100", "555-123-4567")
EMAIL_POOL = ("sam42@example.com", "kit.doe99@mail.net")
SSN_POOL = ("123-45-6789",)


def _draw_words(rng: np.random.Generator, pools: list[tuple[list[str], float]], n: int) -> list[str]:
    names, weights = zip(*pools)
    weights = np.asarray(weights, dtype=float)
    weights = weights / weights.sum()
    out = []
    for _ in range(n):
        pool = names[rng.choice(len(names), p=weights)]
        out.append(pool[rng.integers(len(pool))])
    return out


def _user_outcomes(rng: np.random.Generator, user_index: int) -> dict:
    depression = float(np.clip(rng.normal(9, 5), 0, 27))
    return {
        "age": int(np.clip(rng.normal(36, 10), 18, 65)),
        "gender": "female" if rng.uniform() < 0.65 else "male",
        "depression": round(depression, 1),
        "stress": round(float(np.clip(rng.normal(16, 6) + 0.4 * depression, 0, 40)), 1),
        "life_satisfaction": round(float(np.clip(rng.normal(7, 1.5) - 0.12 * depression, 0, 10)), 1),
    }


def _compose(
    rng: np.random.Generator, outcomes: dict, platform: str, n_words: int
) -> str:
    dep = outcomes["depression"] / 27.0
    age = (outcomes["age"] - 18) / 47.0
    if platform == "facebook":
        pools = [
            (FB_WORDS, 4.0),
            (COMMON_WORDS, 3.0 + 2.0 * age),
            (SMS_WORDS, 0.8),
            (SAD_WORDS, 0.3 + 2.5 * dep),
            (CALM_WORDS, 0.3 + 2.0 * (1 - dep)),
        ]
    else:
        pools = [
            (FB_WORDS, 0.8),
            (COMMON_WORDS, 2.0 + 2.0 * age),
            (SMS_WORDS, 4.5),
            (SAD_WORDS, 0.2 + 2.0 * dep),
            (CALM_WORDS, 0.2 + 1.6 * (1 - dep)),
        ]
    return " ".join(_draw_words(rng, pools, n_words))


def keystroke_events(
    rng: np.random.Generator,
    user_id: str,
    app_id: str,
    message: str,
    t_start: int,
    typo_prob: float = 0.04,
) -> tuple[list[dict], int]:
    """Simulate typing ``message`` one keystroke at a time, with occasional
    typo-plus-backspace detours, ending with a field-clear event."""
    events = []
    t = t_start
    text = ""

    def emit(snapshot: str, **flags) -> None:
        nonlocal t
        t += int(rng.integers(60, 220))
        events.append(
            {
                "user_id": user_id,
                "timestamp": t,
                "app_id": app_id,
                "current_text": snapshot,
                "is_password": False,
                "is_phone_field": False,
                **flags,
            }
        )

    for ch in message:
        # a typo on the very first character would clear the field on
        # backspace and split the message into two entries
        if ch.isalpha() and text and rng.uniform() < typo_prob:
            wrong = chr(ord("a") + int(rng.integers(26)))
            emit(text + wrong)
            emit(text)  # backspace
        text += ch
        emit(text)
    emit("")  # send: field clears
    return events, t


def make_fixture(outdir: str | Path, n_users: int = 20, seed: int = 0) -> dict[str, Path]:
    """Write the full fixture into ``outdir``; returns the file map."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(seed)

    users = [f"user{idx:02d}" for idx in range(n_users)]
    outcomes = {u: _user_outcomes(rng, i) for i, u in enumerate(users)}

    # facebook corpus: raw posts, a couple with planted PII
    fb_path = outdir / "facebook.jsonl"
    with open(fb_path, "w", encoding="utf-8") as fh:
        for u in users:
            for post in range(10):
                text = _compose(rng, outcomes[u], "facebook", 45)
                if post == 3 and rng.uniform() < 0.3:
                    text += f" reach me at {EMAIL_POOL[rng.integers(len(EMAIL_POOL))]}"
                fh.write(json.dumps({"user_id": u, "platform": "facebook", "text": text}) + "\n")
        # one under-threshold user exercises the exclusion funnel
        for _ in range(2):
            fh.write(
                json.dumps(
                    {
                        "user_id": "user_low",
                        "platform": "facebook",
                        "text": _compose(rng, _user_outcomes(rng, 999), "facebook", 20),
                    }
                )
                + "\n"
            )

    # keystroke log producing the sms corpus
    ks_path = outdir / "keystrokes.jsonl"
    all_events: list[dict] = []
    for i, u in enumerate(users):
        t = 1_600_000_000_000 + i * 10_000_000
        app = ALLOWED_APPS[i % len(ALLOWED_APPS)]
        for msg_idx in range(6):
            message = _compose(rng, outcomes[u], "sms", 13)
            if msg_idx == 2 and i % 3 == 0:
                message += f" call {PHONE_POOL[i % len(PHONE_POOL)]}"
            elif msg_idx == 4 and i % 5 == 0:
                message += f" email {EMAIL_POOL[i % len(EMAIL_POOL)]}"
            events, t = keystroke_events(rng, u, app, message, t)
            all_events.extend(events)
            t += 5_000
        if i % 4 == 0:  # some typing in a non-allowed app
            events, t = keystroke_events(rng, u, OTHER_APP, "search something", t)
            all_events.extend(events)
        if i % 7 == 0:  # a password field: structurally dropped
            t += 1_000
            all_events.append(
                {
                    "user_id": u,
                    "timestamp": t,
                    "app_id": ALLOWED_APPS[0],
                    "current_text": "hunter2",
                    "is_password": True,
                    "is_phone_field": False,
                }
            )
            t += 200
            all_events.append(
                {
                    "user_id": u,
                    "timestamp": t,
                    "app_id": ALLOWED_APPS[0],
                    "current_text": "",
                    "is_password": True,
                    "is_phone_field": False,
                }
            )
    low_events, _ = keystroke_events(
        rng, "user_low", ALLOWED_APPS[0], "ok see you", 1_700_000_000_000
    )
    all_events.extend(low_events)
    with open(ks_path, "w", encoding="utf-8") as fh:
        for ev in all_events:
            fh.write(json.dumps(ev) + "\n")

    # outcomes
    outcomes_path = outdir / "outcomes.csv"
    with open(outcomes_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["user_id", "age", "gender", "depression", "stress", "life_satisfaction"])
        for u in users:
            o = outcomes[u]
            writer.writerow(
                [u, o["age"], o["gender"], o["depression"], o["stress"], o["life_satisfaction"]]
            )
        writer.writerow(["user_low", 30, "female", 5, 10, 8])

    # dictionary categories matching the planted vocabulary
    dict_path = outdir / "dictionary.txt"
    dict_path.write_text(
        "\n".join(
            [
                "[leisure]", "fun", "weekend", "play*", "party", "trip", "beach",
                "[assent]", "yes", "ok*", "yeah",
                "[second_person]", "you", "your", "u",
                "[negative_mood]", "sad", "tired", "alone", "worried", "down",
                "[positive_mood]", "calm", "rested", "cheerful", "grateful", "content",
                "",
            ]
        ),
        encoding="utf-8",
    )

    # pretrained-style depression lexicon
    lex_path = outdir / "lexicon.csv"
    with open(lex_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["term", "category", "weight"])
        writer.writerow(["_intercept", "depression", "9.0"])
        for term in SAD_WORDS:
            writer.writerow([term, "depression", "60.0"])
        for term in CALM_WORDS:
            writer.writerow([term, "depression", "-45.0"])
        writer.writerow(["fun", "depression", "-8.0"])
        writer.writerow(["ok", "depression", "2.0"])

    # embeddings: shared latent signal plus noise, one file per platform
    emb_paths = {}
    d = 32
    for platform in ("fb", "sms"):
        path = outdir / f"embeddings_{platform}.csv"
        emb_paths[platform] = path
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["user_id"] + [f"e{j}" for j in range(d)])
            for u in users:
                o = outcomes[u]
                base = np.abs(rng.normal(0.5, 0.2, size=d))
                base[0] += 0.03 * o["depression"]
                base[1] += 0.05 * (10 - o["life_satisfaction"])
                base[2] += 0.02 * o["stress"]
                base[3] += 0.01 * o["age"]
                base[4] += 0.3 if o["gender"] == "female" else 0.0
                writer.writerow([u] + [f"{v:.6f}" for v in base])

    config_path = outdir / "pipeline.cfg"
    config_path.write_text(
        "\n".join(
            [
                "# synthetic fixture pipeline configuration",
                "keystroke_log = keystrokes.jsonl",
                "facebook_corpus = facebook.jsonl",
                "outcomes = outcomes.csv",
                "dictionary = dictionary.txt",
                "lexicon = lexicon.csv",
                "embeddings_fb = embeddings_fb.csv",
                "embeddings_sms = embeddings_sms.csv",
                "output_dir = out",
                "min_words = 500",
                "min_group_fraction = 0.25",
                "fdr_alpha = 0.05",
                "ridge_alpha = 1.0",
                "seed = 17",
                "bootstrap_iterations = 2000",
                "timeout_ms = 60000",
                "keep_snapshots = false",
                "model_orders = 1",
                "nmf_k = 8",
                "nmf_iterations = 150",
                "apps = " + ",".join(ALLOWED_APPS),
                "",
            ]
        ),
        encoding="utf-8",
    )

    return {
        "keystroke_log": ks_path,
        "facebook_corpus": fb_path,
        "outcomes": outcomes_path,
        "dictionary": dict_path,
        "lexicon": lex_path,
        "embeddings_fb": emb_paths["fb"],
        "embeddings_sms": emb_paths["sms"],
        "config": config_path,
    }


if __name__ == "__main__":
    import sys

    target = sys.argv[1] if len(sys.argv) > 1 else "fixture"
    files = make_fixture(target)
    for name, path in sorted(files.items()):
        print(f"{name}: {path}")
