import json
from collections import Counter

import numpy as np
import pytest

from newsrec.corpus import (DAY, Article, Corpus, CorpusError, Kind,
                            SyntheticWorldConfig, WordVectors, compute_embedding,
                            generate_world, load_corpus, save_corpus, text_stats,
                            tokenize)

from conftest import T0, click, impression, make_provider


def write_lines(path, lines):
    path.write_text("".join(json.dumps(x) + "\n" for x in lines), encoding="utf-8")


def article_line(id="a1", body="alpha beta.", **over):
    line = {"id": id, "published_at": T0, "section": "news", "tags": ["t1"],
            "authors": ["au1"], "title": "t", "body": body}
    line.update(over)
    return line


class TestTokenize:
    def test_lowercases_and_splits_on_non_alnum(self):
        assert tokenize("Hello, World! foo-bar_baz 42x") == \
            ["hello", "world", "foo", "bar", "baz", "42x"]

    def test_unicode(self):
        assert tokenize("Crème brûlée!") == ["crème", "brûlée"]


class TestTextStats:
    def test_hand_counted_example(self):
        # oracle: tokenize and count by hand
        wc, _, _, _, hapax, dis = text_stats("a b a c")
        counts = Counter(["a", "b", "a", "c"])
        assert wc == 4
        assert hapax == sum(1 for v in counts.values() if v == 1) == 2
        assert dis == sum(1 for v in counts.values() if v == 2) == 1

    def test_sentences_and_paragraphs(self):
        body = "One two. Three!\n\nFour five? Six."
        _, sentences, paragraphs, chars, _, _ = text_stats(body)
        assert sentences == 4
        assert paragraphs == 2
        assert chars == len(body)


class TestComputeEmbedding:
    def test_single_known_word(self):
        provider = make_provider()
        vec = compute_embedding("alpha", provider)
        assert np.array_equal(vec, provider.vector("alpha"))

    def test_repeated_word_is_mean_of_identical(self):
        provider = make_provider()
        vec = compute_embedding("alpha alpha", provider)
        assert np.allclose(vec, provider.vector("alpha"))

    def test_two_words_coordinatewise_mean(self):
        provider = make_provider()
        vec = compute_embedding("alpha beta", provider)
        v1, v2 = provider.vector("alpha"), provider.vector("beta")
        for i in range(provider.dim):  # brute-force per-coordinate oracle
            assert vec[i] == pytest.approx((v1[i] + v2[i]) / 2, abs=1e-15)

    def test_unknown_words_excluded(self):
        provider = make_provider()
        assert np.allclose(compute_embedding("alpha zzz", provider),
                           provider.vector("alpha"))

    def test_all_unknown_gives_zero_vector(self):
        provider = make_provider()
        assert np.array_equal(compute_embedding("zzz qqq", provider),
                              np.zeros(provider.dim))


class TestLoadCorpus:
    def test_one_article_empty_events(self, tmp_path):
        arts, evts = tmp_path / "a.jsonl", tmp_path / "e.jsonl"
        write_lines(arts, [article_line()])
        evts.write_text("", encoding="utf-8")
        corpus = load_corpus(arts, evts, make_provider())
        assert len(corpus.articles) == 1
        assert corpus.events == []

    def test_derived_fields_computed(self, tmp_path):
        arts, evts = tmp_path / "a.jsonl", tmp_path / "e.jsonl"
        write_lines(arts, [article_line(body="alpha beta alpha gamma")])
        evts.write_text("", encoding="utf-8")
        corpus = load_corpus(arts, evts, make_provider())
        art = corpus.articles["a1"]
        assert art.word_count == 4
        assert art.hapax_count == 2
        assert art.dis_count == 1

    def test_duplicate_id_error_names_id(self, tmp_path):
        arts, evts = tmp_path / "a.jsonl", tmp_path / "e.jsonl"
        write_lines(arts, [article_line(), article_line()])
        evts.write_text("", encoding="utf-8")
        with pytest.raises(CorpusError, match="a1"):
            load_corpus(arts, evts, make_provider())

    def test_malformed_line_carries_line_number(self, tmp_path):
        arts, evts = tmp_path / "a.jsonl", tmp_path / "e.jsonl"
        arts.write_text(json.dumps(article_line()) + "\n{broken\n", encoding="utf-8")
        evts.write_text("", encoding="utf-8")
        with pytest.raises(CorpusError, match=r":2"):
            load_corpus(arts, evts, make_provider())

    def test_event_with_unknown_article_lists_ids(self, tmp_path):
        arts, evts = tmp_path / "a.jsonl", tmp_path / "e.jsonl"
        write_lines(arts, [article_line()])
        write_lines(evts, [
            {"user_id": "u1", "article_id": "ghost1", "at": T0, "kind": "click",
             "context": "other"},
            {"user_id": "u1", "article_id": "ghost2", "at": T0, "kind": "impression",
             "context": "other"},
        ])
        with pytest.raises(CorpusError, match="ghost1, ghost2"):
            load_corpus(arts, evts, make_provider())

    def test_iso_and_epoch_timestamps(self, tmp_path):
        arts, evts = tmp_path / "a.jsonl", tmp_path / "e.jsonl"
        write_lines(arts, [article_line(id="a1", published_at="2024-01-01T00:00:00Z"),
                           article_line(id="a2", published_at=T0)])
        evts.write_text("", encoding="utf-8")
        corpus = load_corpus(arts, evts, make_provider())
        assert corpus.articles["a1"].published_at == corpus.articles["a2"].published_at == T0

    def test_events_sorted_and_deduplicated(self, tmp_path):
        arts, evts = tmp_path / "a.jsonl", tmp_path / "e.jsonl"
        write_lines(arts, [article_line()])
        ev = {"user_id": "u1", "article_id": "a1", "at": T0 + 60, "kind": "click",
              "context": "other"}
        earlier = dict(ev, at=T0, kind="impression")
        write_lines(evts, [ev, ev, earlier])
        corpus = load_corpus(arts, evts, make_provider())
        assert [e.kind for e in corpus.events] == [Kind.IMPRESSION, Kind.CLICK]


class TestRoundTrip:
    def test_save_load_equal(self, tmp_path, tiny_world):
        _, corpus, truth = tiny_world
        arts, evts = tmp_path / "a.jsonl", tmp_path / "e.jsonl"
        save_corpus(corpus, arts, evts)
        reloaded = load_corpus(arts, evts, truth.word_vectors)
        assert reloaded == corpus

    def test_word_vectors_file_roundtrip(self, tmp_path):
        provider = make_provider()
        provider.save(tmp_path / "v.txt")
        again = WordVectors.from_file(tmp_path / "v.txt")
        assert again.dim == provider.dim
        for w in provider.words():
            assert np.array_equal(again.vector(w), provider.vector(w))


class TestGenerateWorld:
    def test_deterministic(self, tmp_path):
        cfg = SyntheticWorldConfig(seed=5, n_users=5, n_days=2, articles_per_day=4,
                                   embedding_dim=8, user_affinity_dim=4,
                                   vocab_size=100, n_tags=10, n_authors=5,
                                   n_sections=3, n_personas=2)
        c1, _ = generate_world(cfg)
        c2, _ = generate_world(cfg)
        assert c1 == c2
        # byte-identical serialization
        for corpus, name in ((c1, "1"), (c2, "2")):
            save_corpus(corpus, tmp_path / f"a{name}.jsonl", tmp_path / f"e{name}.jsonl")
        assert (tmp_path / "a1.jsonl").read_bytes() == (tmp_path / "a2.jsonl").read_bytes()
        assert (tmp_path / "e1.jsonl").read_bytes() == (tmp_path / "e2.jsonl").read_bytes()

    def test_different_seeds_differ(self):
        base = dict(n_users=5, n_days=2, articles_per_day=4, embedding_dim=8,
                    user_affinity_dim=4, vocab_size=100, n_tags=10, n_authors=5,
                    n_sections=3, n_personas=2)
        c1, _ = generate_world(SyntheticWorldConfig(seed=5, **base))
        c2, _ = generate_world(SyntheticWorldConfig(seed=6, **base))
        assert c1.events != c2.events

    def test_article_counts_and_day_bounds(self):
        cfg = SyntheticWorldConfig(seed=1, n_users=2, n_days=3, articles_per_day=70,
                                   embedding_dim=8, user_affinity_dim=4,
                                   vocab_size=100, n_tags=10, n_authors=5,
                                   n_sections=3, n_personas=2,
                                   impressions_per_session=3)
        corpus, _ = generate_world(cfg)
        assert len(corpus.articles) == 210
        for art in corpus.articles.values():
            day_index = (art.published_at - cfg.start) // DAY
            assert 0 <= day_index < 3
            assert cfg.start + day_index * DAY <= art.published_at < cfg.start + (day_index + 1) * DAY

    def test_zero_noise_clicks_above_threshold(self, tiny_world):
        _, corpus, truth = tiny_world
        clicks = [e for e in corpus.events if e.kind is Kind.CLICK]
        assert clicks
        for ev in clicks:
            assert truth.click_prob(ev.user_id, ev.article_id) >= truth.click_threshold

    def test_hapax_dis_invariant(self, tiny_world):
        _, corpus, _ = tiny_world
        for art in corpus.articles.values():
            assert 0 <= art.hapax_count + 2 * art.dis_count <= art.word_count

    def test_bad_configs_rejected(self):
        with pytest.raises(ValueError, match="n_users"):
            SyntheticWorldConfig(n_users=0)
        with pytest.raises(ValueError, match="zipf"):
            SyntheticWorldConfig(zipf_exponent=0.0)
        with pytest.raises(ValueError, match="click_noise"):
            SyntheticWorldConfig(click_noise=1.5)


class TestInvariants:
    def test_duplicate_article_rejected_in_constructor(self):
        art = Article.from_content("a1", T0, "news", ["t"], ["au"], "t",
                                   "alpha beta", make_provider())
        with pytest.raises(CorpusError, match="a1"):
            Corpus([art, art], [], 4)

    def test_embedding_dim_checked(self):
        art = Article.from_content("a1", T0, "news", ["t"], ["au"], "t",
                                   "alpha beta", make_provider(dim=4))
        with pytest.raises(CorpusError, match="dim"):
            Corpus([art], [], 8)

    def test_events_between_half_open(self):
        provider = make_provider()
        art = Article.from_content("a1", T0, "news", ["t"], ["au"], "t",
                                   "alpha", provider)
        events = [impression("u1", "a1", T0 + i) for i in range(5)]
        corpus = Corpus([art], events, 4)
        got = corpus.events_between(T0 + 1, T0 + 3)
        assert [e.at for e in got] == [T0 + 1, T0 + 2]
