"""Tokenizer, n-gram frequencies, dictionary extraction, corpus loading."""

from __future__ import annotations

import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from scrublang.features import (
    DictionaryError,
    DictionarySpec,
    UserCorpus,
    extract_dictionary,
    extract_ngrams,
    filter_min_words,
    group_frequency_filter,
    is_placeholder_token,
    load_corpus_jsonl,
    ngram_counts,
    tokenize,
    user_feature_table,
)

tokens_strategy = st.lists(
    st.sampled_from(["a", "b", "c", "dd", "ee", ":)", "<email>"]), min_size=1, max_size=30
)


class TestTokenize:
    def test_punctuation_split_and_emoticon(self):
        assert tokenize("Love this!! :)") == ["love", "this", "!", "!", ":)"]

    def test_empty(self):
        assert tokenize("") == []

    def test_contractions_stay_whole(self):
        assert tokenize("i'll text u") == ["i'll", "text", "u"]
        assert tokenize("I’m here") == ["i'm", "here"]

    def test_placeholders_are_single_tokens(self):
        toks = tokenize("saw <work of art> and <date|phone> today")
        assert "<work of art>" in toks and "<date|phone>" in toks

    def test_hashtags_and_mentions(self):
        assert tokenize("at the #beach w/ @sam") == ["at", "the", "#beach", "w", "/", "@sam"]

    def test_placeholder_predicate(self):
        assert is_placeholder_token("<email>")
        assert is_placeholder_token("<work of art>")
        assert not is_placeholder_token("email")
        assert not is_placeholder_token("<3")


class TestNgrams:
    def test_single_document_counts(self):
        vec = extract_ngrams(["a", "b", "a"])
        assert vec["a"] == pytest.approx(2 / 3)
        assert vec["b"] == pytest.approx(1 / 3)
        assert vec["a b"] == pytest.approx(1 / 2)
        assert vec["b a"] == pytest.approx(1 / 2)

    def test_single_token_has_no_higher_orders(self):
        vec = extract_ngrams(["a"])
        assert vec == {"a": 1.0}

    def test_no_cross_document_ngrams(self):
        vec = extract_ngrams([["a", "b"], ["b", "a"]])
        assert "b b" not in vec
        assert vec["a b"] == pytest.approx(1 / 2)
        assert vec["b a"] == pytest.approx(1 / 2)

    @given(tokens_strategy)
    @settings(max_examples=100, deadline=None)
    def test_per_order_frequencies_sum_to_one(self, tokens):
        vec = extract_ngrams(tokens)
        for order in (1, 2, 3):
            total = sum(v for k, v in vec.items() if k.count(" ") + 1 == order)
            if len(tokens) >= order:
                assert total == pytest.approx(1.0)

    @given(st.lists(tokens_strategy, min_size=2, max_size=4))
    @settings(max_examples=50, deadline=None)
    def test_counts_stable_under_document_order(self, docs):
        counts1, totals1 = ngram_counts(docs)
        counts2, totals2 = ngram_counts(list(reversed(docs)))
        assert counts1 == counts2 and totals1 == totals2


class TestDictionary:
    def test_wildcard_prefix_counting(self):
        spec = DictionarySpec({"assent": ["yes", "ok*"]})
        out = extract_dictionary(["yes", "ok", "okay", "no"], spec)
        assert out == {"assent": pytest.approx(3 / 4)}

    def test_empty_tokens_give_zero(self):
        spec = DictionarySpec({"assent": ["yes"], "negate": ["no"]})
        assert extract_dictionary([], spec) == {"assent": 0.0, "negate": 0.0}

    def test_token_counts_once_per_category(self):
        spec = DictionarySpec({"a": ["ok"], "b": ["ok*"]})
        out = extract_dictionary(["ok"], spec)
        assert out == {"a": 1.0, "b": 1.0}

    def test_internal_star_rejected(self):
        with pytest.raises(DictionaryError):
            DictionarySpec({"bad": ["o*k"]})
        with pytest.raises(DictionaryError):
            DictionarySpec({"bad": ["*ok"]})

    def test_monotone_under_added_entry(self):
        tokens = "yes ok sure fine".split()
        base = DictionarySpec({"c": ["yes"]})
        larger = DictionarySpec({"c": ["yes", "sure"]})
        assert extract_dictionary(tokens, larger)["c"] >= extract_dictionary(tokens, base)["c"]

    def test_file_parsing(self, tmp_path):
        path = tmp_path / "dict.txt"
        path.write_text("# comment\n[assent]\nyes\nok*\n[leisure]\nfun\n")
        spec = DictionarySpec.from_file(path)
        assert spec.categories == {"assent": ["yes", "ok*"], "leisure": ["fun"]}

    def test_file_entry_before_header(self, tmp_path):
        path = tmp_path / "dict.txt"
        path.write_text("yes\n[assent]\n")
        with pytest.raises(DictionaryError):
            DictionarySpec.from_file(path)


class TestCorpus:
    def test_jsonl_round_trip(self, tmp_path):
        path = tmp_path / "corpus.jsonl"
        rows = [
            {"user_id": "u1", "platform": "facebook", "text": "fun weekend"},
            {"user_id": "u1", "platform": "sms", "text": "ok yes"},
            {"user_id": "u1", "platform": "facebook", "text": "more fun"},
        ]
        path.write_text("\n".join(json.dumps(r) for r in rows) + "\n")
        corpora = load_corpus_jsonl(path)
        assert corpora[("u1", "facebook")].documents == ["fun weekend", "more fun"]
        assert corpora[("u1", "sms")].documents == ["ok yes"]

    def test_bad_record(self, tmp_path):
        path = tmp_path / "corpus.jsonl"
        path.write_text('{"user_id": "u1"}\n')
        with pytest.raises(ValueError):
            load_corpus_jsonl(path)

    def test_min_words_across_platforms(self):
        corpora = {
            ("u1", "facebook"): UserCorpus("u1", "facebook", ["w " * 300]),
            ("u1", "sms"): UserCorpus("u1", "sms", ["w " * 250]),
            ("u2", "facebook"): UserCorpus("u2", "facebook", ["w " * 100]),
        }
        kept, excluded = filter_min_words(corpora, 500)
        assert ("u1", "sms") in kept and ("u2", "facebook") not in kept
        assert excluded == {"u2": 100}

    def test_group_frequency_filter(self):
        vectors = {
            "u1": {"common": 0.5, "rare": 0.1},
            "u2": {"common": 0.4},
            "u3": {"common": 0.2},
            "u4": {"common": 0.3},
        }
        assert group_frequency_filter(vectors, 0.5) == ["common"]
        assert group_frequency_filter(vectors, 0.25) == ["common", "rare"]

    def test_user_feature_table_platform_selection(self):
        corpora = {
            ("u1", "facebook"): UserCorpus("u1", "facebook", ["a b"]),
            ("u1", "sms"): UserCorpus("u1", "sms", ["c"]),
        }
        table = user_feature_table(corpora, "facebook", orders=(1,))
        assert table == {"u1": {"a": 0.5, "b": 0.5}}
