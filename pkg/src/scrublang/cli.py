"""Command-line entry points.

Subcommands: redact, summary, features, diff, train, evaluate, importance,
pipeline.  ``pipeline`` chains everything deterministically: keystroke
redaction -> corpus assembly (the same cleaning applied to both platforms) ->
summary -> differential language analysis -> pretrained-lexicon estimates ->
cross-domain model evaluation -> feature importance, plus a manifest of
seeds, thresholds, and input digests.

Configuration files are flat ``key = value`` text (# comments allowed);
relative paths resolve against the config file's directory.  ``--seed``,
``--alpha`` (FDR), and ``--min-words`` override the file.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass, fields
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import (
    CategoryDiff,
    InsufficientUsersError,
    NgramDiff,
    cloud_data,
    diff_categories,
    diff_ngrams,
    shared_users,
    summary_stats,
)
from .detectors import DetectorSuite, Gazetteer, default_suite
from .features import (
    DEFAULT_MIN_GROUP_FRACTION,
    DEFAULT_MIN_WORDS,
    DictionarySpec,
    UserCorpus,
    filter_min_words,
    group_frequency_filter,
    load_corpus_jsonl,
    user_feature_table,
)
from .io import (
    load_embeddings,
    load_lexicon_csv,
    load_outcomes_csv,
    save_lexicon_csv,
    write_csv,
    write_json,
    write_manifest,
)
from .modeling import (
    CELL_ORDER,
    EvalReport,
    apply_lexicon,
    bootstrap_accuracy_diff,
    cross_domain_matrix,
    feature_importance,
    nmf_reduce,
    ridge_fit,
    sign_accuracy,
)
from .redactor import (
    DEFAULT_TIMEOUT_MS,
    KeystrokeEvent,
    OutOfOrderError,
    StreamRedactor,
    redact_string,
)
from .stats import DegenerateDataError, bootstrap_corr_diff, pearson_r

BINARY_OUTCOMES = frozenset({"gender"})


class PipelineError(RuntimeError):
    """A pipeline stage failed; partial outputs have been removed."""


@dataclass
class RunConfig:
    keystroke_log: str | None = None
    facebook_corpus: str | None = None
    outcomes: str | None = None
    dictionary: str | None = None
    lexicon: str | None = None
    embeddings_fb: str | None = None
    embeddings_sms: str | None = None
    gazetteer: str | None = None
    catalogue: str | None = None
    output_dir: str = "out"
    min_words: int = DEFAULT_MIN_WORDS
    min_group_fraction: float = DEFAULT_MIN_GROUP_FRACTION
    fdr_alpha: float = 0.05
    ridge_alpha: float = 1.0
    seed: int = 0
    bootstrap_iterations: int = 10_000
    timeout_ms: int = DEFAULT_TIMEOUT_MS
    keep_snapshots: bool = False
    model_orders: tuple[int, ...] = (1, 2, 3)
    nmf_k: int = 128
    nmf_iterations: int = 200
    apps: tuple[str, ...] = ()

    _PATH_KEYS = (
        "keystroke_log",
        "facebook_corpus",
        "outcomes",
        "dictionary",
        "lexicon",
        "embeddings_fb",
        "embeddings_sms",
        "gazetteer",
        "catalogue",
    )

    @classmethod
    def from_file(cls, path: str | Path) -> "RunConfig":
        path = Path(path)
        base = path.parent
        raw: dict[str, str] = {}
        for lineno, line in enumerate(path.read_text(encoding="utf-8").splitlines(), 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected 'key = value'")
            key, _, value = line.partition("=")
            raw[key.strip()] = value.strip()

        cfg = cls()
        known = {f.name for f in fields(cls)}
        for key, value in raw.items():
            if key not in known:
                raise ValueError(f"{path}: unknown config key {key!r}")
            if key in cls._PATH_KEYS or key == "output_dir":
                resolved = str((base / value).resolve()) if value else None
                setattr(cfg, key, resolved)
            elif key in ("min_words", "seed", "bootstrap_iterations", "timeout_ms", "nmf_k", "nmf_iterations"):
                setattr(cfg, key, int(value))
            elif key in ("min_group_fraction", "fdr_alpha", "ridge_alpha"):
                setattr(cfg, key, float(value))
            elif key == "keep_snapshots":
                setattr(cfg, key, value.lower() in ("1", "true", "yes", "on"))
            elif key == "model_orders":
                setattr(cfg, key, tuple(int(v) for v in value.split(",") if v.strip()))
            elif key == "apps":
                setattr(cfg, key, tuple(v.strip() for v in value.split(",") if v.strip()))
        cfg.validate()
        return cfg

    def validate(self) -> None:
        for key in self._PATH_KEYS:
            value = getattr(self, key)
            if value is not None and not Path(value).exists():
                raise FileNotFoundError(f"config path {key} = {value} does not exist")
        if not (0.0 < self.fdr_alpha < 1.0):
            raise ValueError(f"fdr_alpha must lie in (0, 1), got {self.fdr_alpha}")

    def to_dict(self) -> dict:
        d = {f.name: getattr(self, f.name) for f in fields(self)}
        d["model_orders"] = list(self.model_orders)
        d["apps"] = list(self.apps)
        return d


def _build_suite(args) -> DetectorSuite:
    gaz = Gazetteer.from_file(args.gazetteer) if getattr(args, "gazetteer", None) else None
    catalogue = getattr(args, "catalogue", None)
    if gaz is None and catalogue is None:
        return default_suite()
    return DetectorSuite.default(catalogue_path=catalogue, gazetteer=gaz)


def run_redaction(
    log_path: str | Path,
    suite: DetectorSuite,
    timeout_ms: int = DEFAULT_TIMEOUT_MS,
    keep_snapshots: bool = False,
    apps: tuple[str, ...] = (),
):
    """Stream a keystroke log through the redactor.

    Returns (entries, counters); events from non-allow-listed apps and events
    arriving out of order are skipped and counted, mirroring the ingestion
    exclusion funnel.
    """
    redactor = StreamRedactor(
        suite=suite, timeout_ms=timeout_ms, keep_snapshots=keep_snapshots
    )
    counters = {"events": 0, "apps_filtered": 0, "out_of_order": 0}
    entries = []
    with open(log_path, encoding="utf-8") as fh:
        for line in fh:
            if not line.strip():
                continue
            event = KeystrokeEvent.from_json(line)
            counters["events"] += 1
            if apps and event.app_id not in apps:
                counters["apps_filtered"] += 1
                continue
            try:
                entries.extend(redactor.ingest_event(event))
            except OutOfOrderError:
                counters["out_of_order"] += 1
    entries.extend(redactor.finish())
    return entries, counters


def _load_clean_corpora(
    corpus_path: str | Path, suite: DetectorSuite
) -> dict[tuple[str, str], UserCorpus]:
    """Load a corpus file and run every document through the cleaning pipeline
    (idempotent, so pre-redacted corpora pass through unchanged)."""
    corpora = load_corpus_jsonl(corpus_path)
    for corpus in corpora.values():
        corpus.documents = [redact_string(doc, suite).text for doc in corpus.documents]
    return corpora


def _sms_corpora_from_entries(entries) -> dict[tuple[str, str], UserCorpus]:
    corpora: dict[tuple[str, str], UserCorpus] = {}
    for e in sorted(entries, key=lambda e: (e.user_id, e.start_timestamp, e.app_id)):
        key = (e.user_id, "sms")
        corpus = corpora.get(key)
        if corpus is None:
            corpus = corpora[key] = UserCorpus(user_id=e.user_id, platform="sms")
        corpus.documents.append(e.final_text)
    return corpora


def _outcome_kinds(outcome_names) -> dict[str, str]:
    return {n: ("binary" if n in BINARY_OUTCOMES else "continuous") for n in outcome_names}


def _lexicon_estimates(
    models,
    corpora,
    outcomes,
    bootstrap_iterations: int,
    seed: int,
) -> dict:
    """Task-style evaluation of pretrained lexicon models on both platforms:
    correlate (or score accuracy of) per-user estimates against self-reports,
    with a bootstrap test on the facebook-vs-sms difference."""
    users = shared_users(corpora)
    vectors = {
        plat: {u: corpora[(u, plat)].ngram_features((1,)) for u in users}
        for plat in ("facebook", "sms")
    }
    report: dict = {"n_users": len(users), "models": {}}
    for name in sorted(models):
        model = models[name]
        y_raw = [outcomes.get(u, {}).get(name) for u in users]
        keep = [i for i, v in enumerate(y_raw) if v is not None and np.isfinite(v)]
        if len(keep) < 3:
            continue
        y = np.array([float(y_raw[i]) for i in keep])
        est = {
            plat: np.array(
                [apply_lexicon(model, vectors[plat][users[i]]) for i in keep]
            )
            for plat in ("facebook", "sms")
        }
        entry: dict = {}
        if name in BINARY_OUTCOMES:
            entry["metric"] = "accuracy"
            entry["facebook"] = sign_accuracy(est["facebook"], y)
            entry["sms"] = sign_accuracy(est["sms"], y)
            entry["bootstrap"] = bootstrap_accuracy_diff(
                est["facebook"], est["sms"], y, bootstrap_iterations, seed
            )
        else:
            entry["metric"] = "pearson_r"
            try:
                entry["facebook"] = pearson_r(est["facebook"], y)
                entry["sms"] = pearson_r(est["sms"], y)
                res = bootstrap_corr_diff(
                    est["facebook"], est["sms"], y, bootstrap_iterations, seed=seed
                )
                entry["bootstrap"] = {
                    "delta": res.delta_r,
                    "p_value": res.p_value,
                    "skipped": res.skipped,
                }
            except DegenerateDataError as exc:
                entry["degenerate"] = str(exc)
        report["models"][name] = entry
    return report


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def cmd_redact(args) -> int:
    suite = _build_suite(args)
    apps = tuple(a.strip() for a in args.apps.split(",") if a.strip()) if args.apps else ()
    entries, counters = run_redaction(
        args.infile,
        suite,
        timeout_ms=args.timeout_ms,
        keep_snapshots=args.keep_snapshots,
        apps=apps,
    )
    with open(args.outfile, "w", encoding="utf-8") as fh:
        for e in entries:
            fh.write(e.to_json() + "\n")
    print(
        f"redact: {counters['events']} events -> {len(entries)} entries "
        f"({counters['apps_filtered']} filtered by app, "
        f"{counters['out_of_order']} out of order)"
    )
    return 0


def cmd_summary(args) -> int:
    suite = _build_suite(args)
    corpora = _load_clean_corpora(args.corpus, suite)
    stats = summary_stats(corpora)
    for plat, block in sorted(stats.items()):
        w, p = block["words"], block["posts"]
        print(
            f"{plat}: n={block['n_users']} "
            f"words med/mean/sd = {w['median']:.0f}/{w['mean']:.1f}/{w['sd']:.1f} "
            f"posts med/mean/sd = {p['median']:.0f}/{p['mean']:.1f}/{p['sd']:.1f}"
        )
    if args.out_dir:
        out = Path(args.out_dir)
        out.mkdir(parents=True, exist_ok=True)
        write_json(stats, out / "summary.json")
        rows = [
            {"platform": plat, "measure": measure, **block[measure]}
            for plat, block in sorted(stats.items())
            for measure in ("words", "posts")
        ]
        write_csv(
            rows,
            ["platform", "measure", "median", "mean", "sd", "sd_defined"],
            out / "summary.csv",
        )
    return 0


def cmd_features(args) -> int:
    suite = _build_suite(args)
    corpora = _load_clean_corpora(args.corpus, suite)
    corpora, excluded = filter_min_words(corpora, args.min_words)
    orders = tuple(int(v) for v in args.orders.split(","))
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    ngrams = {
        plat: user_feature_table(corpora, plat, orders)
        for plat in sorted({p for (_, p) in corpora})
    }
    write_json(ngrams, out / "ngram_features.json")
    if args.dictionary:
        spec = DictionarySpec.from_file(args.dictionary)
        cats = {
            plat: {
                u: corpora[(u, plat)].dictionary_features(spec)
                for (u, p) in sorted(corpora)
                if p == plat
            }
            for plat in sorted({p for (_, p) in corpora})
        }
        write_json(cats, out / "dictionary_features.json")
    if excluded:
        write_json({"min_words": excluded}, out / "exclusions.json")
    print(f"features: wrote {out} (excluded {len(excluded)} users below {args.min_words} words)")
    return 0


def _diff_outputs(
    out: Path,
    ngram_rows: list[NgramDiff],
    category_rows: list[CategoryDiff] | None,
) -> None:
    write_json([r.to_dict() for r in ngram_rows], out / "ngram_diff.json")
    write_csv(
        [r.to_dict() for r in ngram_rows],
        [
            "ngram",
            "cohens_d",
            "p_value",
            "q_significant",
            "freq_facebook",
            "freq_sms",
            "degenerate",
            "p_fallback",
        ],
        out / "ngram_diff.csv",
    )
    clouds = cloud_data(ngram_rows)
    write_json([c.to_dict() for c in clouds], out / "cloud.json")
    if category_rows is not None:
        write_json([r.to_dict() for r in category_rows], out / "category_diff.json")
        write_csv(
            [r.to_dict() for r in category_rows],
            [
                "category",
                "t_statistic",
                "p_value",
                "q_significant",
                "mean_facebook",
                "mean_sms",
                "degenerate",
            ],
            out / "category_diff.csv",
        )


def cmd_diff(args) -> int:
    suite = _build_suite(args)
    corpora = _load_clean_corpora(args.corpus, suite)
    corpora, excluded = filter_min_words(corpora, args.min_words)
    ngram_rows = diff_ngrams(
        corpora, alpha=args.alpha, min_group_fraction=args.min_group_fraction
    )
    category_rows = None
    if args.dictionary:
        spec = DictionarySpec.from_file(args.dictionary)
        category_rows = diff_categories(corpora, spec, alpha=args.alpha)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    _diff_outputs(out, ngram_rows, category_rows)
    n_sig = sum(r.q_significant for r in ngram_rows)
    print(
        f"diff: {len(ngram_rows)} n-grams tested, {n_sig} FDR-significant "
        f"at alpha={args.alpha} ({len(excluded)} users excluded)"
    )
    return 0


def _modeling_tables(corpora, orders, min_group_fraction):
    users = shared_users(corpora)
    fb = {u: corpora[(u, "facebook")].ngram_features(orders) for u in users}
    sms = {u: corpora[(u, "sms")].ngram_features(orders) for u in users}
    combined = {u: {**sms[u], **fb[u]} for u in users}
    feature_names = group_frequency_filter(combined, min_group_fraction)
    feature_names = [f for f in feature_names if "<" not in f]  # placeholders: display only
    return users, fb, sms, feature_names


def cmd_train(args) -> int:
    suite = _build_suite(args)
    corpora = _load_clean_corpora(args.corpus, suite)
    corpora, _ = filter_min_words(corpora, args.min_words)
    outcomes = load_outcomes_csv(args.outcomes)
    orders = tuple(int(v) for v in args.orders.split(","))
    users, fb, sms, feature_names = _modeling_tables(corpora, orders, args.min_group_fraction)
    vectors = fb if args.platform == "facebook" else sms
    wanted = args.outcome or sorted({n for u in users for n in outcomes.get(u, {})})
    models = {}
    for name in wanted:
        pairs = [
            (u, outcomes[u][name])
            for u in users
            if outcomes.get(u, {}).get(name) is not None
        ]
        if len(pairs) < 3:
            print(f"train: skipping {name}: fewer than 3 labeled users", file=sys.stderr)
            continue
        X = np.array(
            [[vectors[u].get(f, 0.0) for f in feature_names] for u, _ in pairs]
        )
        y = np.array([v for _, v in pairs], dtype=float)
        models[name] = ridge_fit(
            X, y, alpha=args.alpha, feature_names=feature_names, outcome=name
        )
    save_lexicon_csv(models, args.out)
    print(f"train: wrote {len(models)} {args.platform} models to {args.out}")
    return 0


def _eval_report_rows(report: EvalReport) -> list[dict]:
    rows = []
    for name, ev in sorted(report.outcomes.items()):
        for cell in CELL_ORDER:
            res = ev.cells[cell]
            comp = "in_domain" if cell in ("fb_fb", "sms_sms") else "cross_domain"
            boot = ev.bootstrap.get(comp, {})
            rows.append(
                {
                    "outcome": name,
                    "cell": cell,
                    "metric": res.metric,
                    "value": res.value,
                    "n": res.n,
                    "bootstrap_comparison": comp,
                    "bootstrap_delta": boot.get("delta"),
                    "bootstrap_p": boot.get("p_value"),
                }
            )
    return rows


def _embedding_eval(
    emb_fb_path,
    emb_sms_path,
    users,
    outcomes,
    cfg_alpha,
    nmf_k,
    nmf_iterations,
    bootstrap_iterations,
    seed,
) -> tuple[EvalReport, dict]:
    """Reduce both platforms' embeddings in one shared NMF basis, then run the
    same four-cell evaluation on the reduced features."""
    fb_users, fb_mat = load_embeddings(emb_fb_path)
    sms_users, sms_mat = load_embeddings(emb_sms_path)
    fb_index = {u: i for i, u in enumerate(fb_users)}
    sms_index = {u: i for i, u in enumerate(sms_users)}
    usable = [u for u in users if u in fb_index and u in sms_index]
    if len(usable) < 3:
        raise ValueError("fewer than 3 users have embeddings on both platforms")
    fb_rows = fb_mat[[fb_index[u] for u in usable]]
    sms_rows = sms_mat[[sms_index[u] for u in usable]]
    stacked = np.vstack([fb_rows, sms_rows])
    k = min(nmf_k, min(stacked.shape))
    result = nmf_reduce(stacked, k=k, iterations=nmf_iterations, seed=seed)
    W = result.W
    n = len(usable)
    names = [f"nmf{j}" for j in range(k)]
    feats_fb = {u: dict(zip(names, W[i])) for i, u in enumerate(usable)}
    feats_sms = {u: dict(zip(names, W[n + i])) for i, u in enumerate(usable)}
    report = cross_domain_matrix(
        feats_fb,
        feats_sms,
        {u: outcomes.get(u, {}) for u in usable},
        alpha=cfg_alpha,
        binary_outcomes=BINARY_OUTCOMES,
        feature_names=names,
        bootstrap_iterations=bootstrap_iterations,
        seed=seed,
    )
    info = {
        "k": k,
        "iterations": nmf_iterations,
        "reconstruction_error": result.reconstruction_error,
        "n_users": n,
    }
    return report, info


def cmd_evaluate(args) -> int:
    suite = _build_suite(args)
    corpora = _load_clean_corpora(args.corpus, suite)
    corpora, _ = filter_min_words(corpora, args.min_words)
    outcomes = load_outcomes_csv(args.outcomes)
    orders = tuple(int(v) for v in args.orders.split(","))
    users, fb, sms, feature_names = _modeling_tables(corpora, orders, args.min_group_fraction)
    report = cross_domain_matrix(
        {u: fb[u] for u in users},
        {u: sms[u] for u in users},
        {u: outcomes.get(u, {}) for u in users},
        alpha=args.alpha,
        binary_outcomes=BINARY_OUTCOMES,
        feature_names=feature_names,
        bootstrap_iterations=args.bootstrap_iterations,
        seed=args.seed,
        cross_fit=args.cross_fit,
    )
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_json(report.to_dict(), out / "eval_report.json")
    write_csv(
        _eval_report_rows(report),
        [
            "outcome",
            "cell",
            "metric",
            "value",
            "n",
            "bootstrap_comparison",
            "bootstrap_delta",
            "bootstrap_p",
        ],
        out / "eval_report.csv",
    )
    if args.embeddings_fb and args.embeddings_sms:
        emb_report, info = _embedding_eval(
            args.embeddings_fb,
            args.embeddings_sms,
            users,
            outcomes,
            args.alpha,
            args.nmf_k,
            args.nmf_iterations,
            args.bootstrap_iterations,
            args.seed,
        )
        write_json({"nmf": info, **emb_report.to_dict()}, out / "embedding_eval.json")
    print(f"evaluate: wrote {out} for {len(report.outcomes)} outcomes, n={len(users)} users")
    return 0


def cmd_importance(args) -> int:
    suite = _build_suite(args)
    corpora = _load_clean_corpora(args.corpus, suite)
    corpora, _ = filter_min_words(corpora, args.min_words)
    models = load_lexicon_csv(args.lexicon)
    if args.outcome not in models:
        raise SystemExit(f"importance: outcome {args.outcome!r} not in {args.lexicon}")
    users = shared_users(corpora)
    if not users:
        raise SystemExit("importance: no users present on both platforms")
    freq = {}
    for plat in ("facebook", "sms"):
        vecs = [corpora[(u, plat)].ngram_features((1,)) for u in users]
        terms = {t for v in vecs for t in v}
        freq[plat] = {t: float(np.mean([v.get(t, 0.0) for v in vecs])) for t in terms}
    rows = feature_importance(models[args.outcome], freq["facebook"], freq["sms"])
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_json([r.to_dict() for r in rows], out / f"importance_{args.outcome}.json")
    write_csv(
        [r.to_dict() for r in rows],
        ["feature", "importance", "weight", "freq_diff", "quadrant"],
        out / f"importance_{args.outcome}.csv",
    )
    print(f"importance: ranked {len(rows)} features for {args.outcome}")
    return 0


def cmd_pipeline(args) -> int:
    cfg = RunConfig.from_file(args.config)
    if args.seed is not None:
        cfg.seed = args.seed
    if args.alpha is not None:
        cfg.fdr_alpha = args.alpha
    if args.min_words is not None:
        cfg.min_words = args.min_words
    cfg.validate()
    if cfg.keystroke_log is None or cfg.facebook_corpus is None or cfg.outcomes is None:
        raise SystemExit("pipeline: config must set keystroke_log, facebook_corpus, outcomes")

    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []

    def track_json(obj, path: Path) -> None:
        write_json(obj, path)
        written.append(path)

    def track_csv(rows, fieldnames, path: Path) -> None:
        write_csv(rows, fieldnames, path)
        written.append(path)

    gaz = Gazetteer.from_file(cfg.gazetteer) if cfg.gazetteer else None
    suite = (
        default_suite()
        if gaz is None and cfg.catalogue is None
        else DetectorSuite.default(catalogue_path=cfg.catalogue, gazetteer=gaz)
    )

    stage = "redact"
    try:
        entries, counters = run_redaction(
            cfg.keystroke_log,
            suite,
            timeout_ms=cfg.timeout_ms,
            keep_snapshots=cfg.keep_snapshots,
            apps=cfg.apps,
        )
        entries_path = out / "entries.jsonl"
        with open(entries_path, "w", encoding="utf-8") as fh:
            for e in entries:
                fh.write(e.to_json() + "\n")
        written.append(entries_path)
        print(f"pipeline[{stage}]: {counters['events']} events -> {len(entries)} entries")

        stage = "corpora"
        corpora = _load_clean_corpora(cfg.facebook_corpus, suite)
        corpora.update(_sms_corpora_from_entries(entries))
        corpora, excluded = filter_min_words(corpora, cfg.min_words)
        track_json(
            {"min_words": excluded, "counters": counters}, out / "exclusions.json"
        )
        users = shared_users(corpora)
        if len(users) < 2:
            raise InsufficientUsersError(
                f"need >= 2 users on both platforms after exclusions, have {len(users)}"
            )
        print(f"pipeline[{stage}]: {len(users)} users on both platforms")

        stage = "summary"
        stats = summary_stats(corpora)
        track_json(stats, out / "summary.json")

        stage = "diff"
        ngram_rows = diff_ngrams(
            corpora, alpha=cfg.fdr_alpha, min_group_fraction=cfg.min_group_fraction
        )
        category_rows = None
        if cfg.dictionary:
            spec = DictionarySpec.from_file(cfg.dictionary)
            category_rows = diff_categories(corpora, spec, alpha=cfg.fdr_alpha)
        _diff_outputs(out, ngram_rows, category_rows)
        written.extend(
            out / name
            for name in (
                "ngram_diff.json",
                "ngram_diff.csv",
                "cloud.json",
                "category_diff.json",
                "category_diff.csv",
            )
            if (out / name).exists()
        )

        stage = "estimates"
        outcomes = load_outcomes_csv(cfg.outcomes)
        pretrained = load_lexicon_csv(cfg.lexicon) if cfg.lexicon else {}
        if pretrained:
            lex_report = _lexicon_estimates(
                pretrained, corpora, outcomes, cfg.bootstrap_iterations, cfg.seed
            )
            track_json(lex_report, out / "lexicon_eval.json")

        stage = "train"
        users_, fb, sms, feature_names = _modeling_tables(
            corpora, cfg.model_orders, cfg.min_group_fraction
        )
        outcome_names = sorted({n for u in users_ for n in outcomes.get(u, {})})
        trained = {}
        for name in outcome_names:
            pairs = [
                (u, outcomes[u][name]) for u in users_ if outcomes.get(u, {}).get(name) is not None
            ]
            if len(pairs) < 3:
                continue
            X = np.array([[fb[u].get(f, 0.0) for f in feature_names] for u, _ in pairs])
            y = np.array([v for _, v in pairs], dtype=float)
            trained[name] = ridge_fit(
                X, y, alpha=cfg.ridge_alpha, feature_names=feature_names, outcome=name
            )
        lex_out = out / "trained_lexicon_facebook.csv"
        save_lexicon_csv(trained, lex_out)
        written.append(lex_out)

        stage = "evaluate"
        report = cross_domain_matrix(
            {u: fb[u] for u in users_},
            {u: sms[u] for u in users_},
            {u: outcomes.get(u, {}) for u in users_},
            alpha=cfg.ridge_alpha,
            binary_outcomes=BINARY_OUTCOMES,
            feature_names=feature_names,
            bootstrap_iterations=cfg.bootstrap_iterations,
            seed=cfg.seed,
        )
        track_json(report.to_dict(), out / "eval_report.json")
        track_csv(
            _eval_report_rows(report),
            [
                "outcome",
                "cell",
                "metric",
                "value",
                "n",
                "bootstrap_comparison",
                "bootstrap_delta",
                "bootstrap_p",
            ],
            out / "eval_report.csv",
        )
        if cfg.embeddings_fb and cfg.embeddings_sms:
            emb_report, info = _embedding_eval(
                cfg.embeddings_fb,
                cfg.embeddings_sms,
                users_,
                outcomes,
                cfg.ridge_alpha,
                cfg.nmf_k,
                cfg.nmf_iterations,
                cfg.bootstrap_iterations,
                cfg.seed,
            )
            track_json({"nmf": info, **emb_report.to_dict()}, out / "embedding_eval.json")

        stage = "importance"
        importance_models = pretrained or trained
        freq = {}
        for plat, vec_table in (("facebook", fb), ("sms", sms)):
            uni = {
                u: corpora[(u, plat)].ngram_features((1,)) for u in users_
            }
            terms = {t for v in uni.values() for t in v}
            freq[plat] = {
                t: float(np.mean([uni[u].get(t, 0.0) for u in users_])) for t in terms
            }
        for name in sorted(importance_models):
            rows = feature_importance(importance_models[name], freq["facebook"], freq["sms"])
            track_json([r.to_dict() for r in rows], out / f"importance_{name}.json")
            track_csv(
                [r.to_dict() for r in rows],
                ["feature", "importance", "weight", "freq_diff", "quadrant"],
                out / f"importance_{name}.csv",
            )

        stage = "manifest"
        inputs = [
            p
            for p in (
                cfg.keystroke_log,
                cfg.facebook_corpus,
                cfg.outcomes,
                cfg.dictionary,
                cfg.lexicon,
                cfg.embeddings_fb,
                cfg.embeddings_sms,
                cfg.gazetteer,
                cfg.catalogue,
            )
            if p
        ]
        write_manifest(out / "manifest.json", cfg.to_dict(), inputs, __version__)
        print(f"pipeline: complete, reports in {out}")
        return 0
    except Exception as exc:
        for path in written:
            Path(path).unlink(missing_ok=True)
        raise PipelineError(f"stage {stage!r} failed: {exc}") from exc


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------


def _add_suite_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--gazetteer", help="gazetteer TSV (label<TAB>surface form)")
    p.add_argument("--catalogue", help="regex catalogue TSV override")


def _add_corpus_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--corpus", required=True, help="JSONL corpus {user_id, platform, text}")
    p.add_argument("--min-words", type=int, default=DEFAULT_MIN_WORDS)
    _add_suite_args(p)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="scrublang",
        description="Keystroke-log PII scrubbing and cross-platform language analysis",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("redact", help="sanitize a keystroke log into entries")
    p.add_argument("--in", dest="infile", required=True, help="keystroke JSONL log")
    p.add_argument("--out", dest="outfile", required=True, help="sanitized entries JSONL")
    p.add_argument("--keep-snapshots", action="store_true")
    p.add_argument("--timeout-ms", type=int, default=DEFAULT_TIMEOUT_MS)
    p.add_argument("--apps", help="comma-separated app allow-list")
    _add_suite_args(p)
    p.set_defaults(func=cmd_redact)

    p = sub.add_parser("summary", help="per-platform word/post statistics")
    p.add_argument("--corpus", required=True)
    p.add_argument("--out-dir")
    _add_suite_args(p)
    p.set_defaults(func=cmd_summary)

    p = sub.add_parser("features", help="extract n-gram and dictionary features")
    _add_corpus_args(p)
    p.add_argument("--dictionary")
    p.add_argument("--orders", default="1,2,3")
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_features)

    p = sub.add_parser("diff", help="differential language analysis between platforms")
    _add_corpus_args(p)
    p.add_argument("--dictionary")
    p.add_argument("--alpha", type=float, default=0.05, help="FDR level")
    p.add_argument("--min-group-fraction", type=float, default=DEFAULT_MIN_GROUP_FRACTION)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_diff)

    p = sub.add_parser("train", help="fit ridge lexicon models on one platform")
    _add_corpus_args(p)
    p.add_argument("--platform", choices=["facebook", "sms"], default="facebook")
    p.add_argument("--outcomes", required=True, help="outcomes CSV")
    p.add_argument("--outcome", action="append", help="outcome name (repeatable; default all)")
    p.add_argument("--alpha", type=float, default=1.0, help="ridge penalty")
    p.add_argument("--orders", default="1,2,3")
    p.add_argument("--min-group-fraction", type=float, default=DEFAULT_MIN_GROUP_FRACTION)
    p.add_argument("--out", required=True, help="lexicon CSV to write")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("evaluate", help="four-cell cross-platform model evaluation")
    _add_corpus_args(p)
    p.add_argument("--outcomes", required=True)
    p.add_argument("--alpha", type=float, default=1.0, help="ridge penalty")
    p.add_argument("--orders", default="1,2,3")
    p.add_argument("--min-group-fraction", type=float, default=DEFAULT_MIN_GROUP_FRACTION)
    p.add_argument("--bootstrap-iterations", type=int, default=10_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--cross-fit", choices=["holdout", "full"], default="holdout")
    p.add_argument("--embeddings-fb")
    p.add_argument("--embeddings-sms")
    p.add_argument("--nmf-k", type=int, default=128)
    p.add_argument("--nmf-iterations", type=int, default=200)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("importance", help="weight-times-frequency feature importance")
    _add_corpus_args(p)
    p.add_argument("--lexicon", required=True, help="lexicon weight CSV")
    p.add_argument("--outcome", required=True)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_importance)

    p = sub.add_parser("pipeline", help="full deterministic run from a config file")
    p.add_argument("--config", required=True)
    p.add_argument("--seed", type=int)
    p.add_argument("--alpha", type=float, help="override FDR alpha")
    p.add_argument("--min-words", type=int)
    p.set_defaults(func=cmd_pipeline)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except PipelineError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (FileNotFoundError, ValueError, InsufficientUsersError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
