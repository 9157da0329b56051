import datetime as dt
import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from newsrec.corpus import WEEK, Corpus
from newsrec.features import (SCHEMA_VERSION, ArticleFeatureCache, FeatureConfig,
                              FeatureError, build_profile, build_training_set,
                              empty_profile, extract, extract_matrix,
                              feature_names, write_schema)

from conftest import T0, click, impression, make_article, make_provider


def corpus_with_clicks(articles, events, dim=4):
    return Corpus(articles, events, dim)


CFG = FeatureConfig(embedding_dim=4)


class TestBuildProfile:
    def test_unknown_user_empty_profile(self):
        corpus = corpus_with_clicks([make_article("a1")], [])
        prof = build_profile(corpus, "nobody", T0)
        assert prof.n_clicks == 0
        assert np.array_equal(prof.mean_embedding, np.zeros(4))
        assert prof.tag_freq == {}

    def test_single_click_aggregates(self):
        art = make_article("a1", tags=("a", "b"), authors=("x",),
                           embedding=[1, 2, 3, 4], word_count=80)
        corpus = corpus_with_clicks([art], [click("u1", "a1", T0 - 100)])
        prof = build_profile(corpus, "u1", T0)
        assert prof.n_clicks == 1
        assert prof.tag_freq == {"a": 1, "b": 1}
        assert np.array_equal(prof.mean_embedding, art.embedding)
        assert prof.mean_word_count == 80

    def test_three_clicks_mean_word_count(self):
        arts = [make_article(f"a{i}", word_count=wc)
                for i, wc in enumerate([50, 75, 100])]
        events = [click("u1", f"a{i}", T0 - 10 * (i + 1)) for i in range(3)]
        corpus = corpus_with_clicks(arts, events)
        prof = build_profile(corpus, "u1", T0)
        # brute-force aggregation oracle
        assert prof.mean_word_count == pytest.approx(sum([50, 75, 100]) / 3)
        assert prof.n_clicks == 3

    def test_window_boundaries_half_open(self):
        arts = [make_article(f"a{i}") for i in range(3)]
        events = [
            click("u1", "a0", T0 - WEEK),      # inclusive lower bound
            click("u1", "a1", T0 - 1),         # inside
            click("u1", "a2", T0),             # as_of itself excluded
        ]
        corpus = corpus_with_clicks(arts, events)
        prof = build_profile(corpus, "u1", T0)
        assert prof.n_clicks == 2

    def test_impressions_do_not_count(self):
        art = make_article("a1", tags=("a",))
        corpus = corpus_with_clicks([art], [impression("u1", "a1", T0 - 5)])
        assert build_profile(corpus, "u1", T0).n_clicks == 0


class TestExtract:
    def test_empty_profile_conventions(self):
        art = make_article("a1", tags=("a",), authors=("x",), embedding=[1, 0, 0, 0])
        prof = empty_profile("u1", T0, 4)
        names = feature_names(CFG)
        fv = extract(prof, art, T0, CFG).values
        get = lambda name: fv[names.index(name)]
        assert get("ua_tag_jaccard") == 0.0
        assert get("ua_author_jaccard") == 0.0
        assert get("ua_section_match") == 0.0
        assert get("ua_embedding_cosine") == 0.0
        assert get("ua_length_ratio") == 1.0

    def test_self_profile_similarity(self):
        art = make_article("a1", tags=("a", "b"), authors=("x",),
                           embedding=[1, 2, 0, 0], word_count=60)
        corpus = corpus_with_clicks([art], [click("u1", "a1", T0 - 5)])
        prof = build_profile(corpus, "u1", T0)
        names = feature_names(CFG)
        fv = extract(prof, art, T0, CFG).values
        get = lambda name: fv[names.index(name)]
        assert get("ua_tag_jaccard") == 1.0
        assert get("ua_author_jaccard") == 1.0
        assert get("ua_section_match") == 1.0
        assert get("ua_embedding_cosine") == pytest.approx(1.0)
        assert get("ua_length_ratio") == pytest.approx(1.0)

    def test_tag_jaccard_hand_oracle(self):
        profile_arts = [make_article(f"p{i}", tags=(t,)) for i, t in enumerate("abc")]
        cand = make_article("cand", tags=("b", "c", "d"))
        events = [click("u1", f"p{i}", T0 - 10 - i) for i in range(3)]
        corpus = corpus_with_clicks(profile_arts + [cand], events)
        prof = build_profile(corpus, "u1", T0)
        names = feature_names(CFG)
        fv = extract(prof, cand, T0, CFG).values
        # brute-force set-overlap oracle
        inter = {"a", "b", "c"} & {"b", "c", "d"}
        union = {"a", "b", "c"} | {"b", "c", "d"}
        assert fv[names.index("ua_tag_jaccard")] == pytest.approx(len(inter) / len(union))
        assert fv[names.index("ua_tag_jaccard")] == pytest.approx(0.5)

    def test_purity_and_finiteness(self):
        art = make_article("a1", word_count=0, embedding=[0, 0, 0, 0])
        prof = empty_profile("u1", T0, 4)
        v1 = extract(prof, art, T0, CFG).values
        v2 = extract(prof, art, T0, CFG).values
        assert np.array_equal(v1, v2)
        assert np.isfinite(v1).all()

    def test_dimension_mismatch_raises(self):
        art = make_article("a1", dim=8)
        prof = empty_profile("u1", T0, 4)
        with pytest.raises(FeatureError, match="dim"):
            extract(prof, art, T0, CFG)

    def test_width_matches_schema(self):
        assert CFG.width == len(feature_names(CFG))
        art = make_article("a1")
        fv = extract(empty_profile("u1", T0, 4), art, T0, CFG)
        assert len(fv.values) == CFG.width
        assert fv.schema_version == SCHEMA_VERSION

    def test_schema_json(self, tmp_path):
        write_schema(CFG, tmp_path / "schema.json")
        payload = json.loads((tmp_path / "schema.json").read_text())
        assert payload["width"] == CFG.width
        assert payload["features"] == feature_names(CFG)
        assert payload["schema_version"] == SCHEMA_VERSION


class TestExtractMatrix:
    def test_matches_scalar_extract(self, tiny_world):
        cfg, corpus, _ = tiny_world
        fcfg = FeatureConfig(embedding_dim=cfg.embedding_dim)
        cache = ArticleFeatureCache(corpus, fcfg)
        at = cfg.start + 3 * 86400.0
        ids = sorted(corpus.articles)[:40]
        for uid in corpus.user_ids()[:5]:
            prof = build_profile(corpus, uid, at)
            M = extract_matrix(prof, ids, at, cache)
            for i, aid in enumerate(ids[:10]):
                row = extract(prof, corpus.articles[aid], at, fcfg).values
                assert np.allclose(M[i], row, atol=1e-12), aid

    def test_all_finite_over_world(self, tiny_world):
        cfg, corpus, _ = tiny_world
        fcfg = FeatureConfig(embedding_dim=cfg.embedding_dim)
        cache = ArticleFeatureCache(corpus, fcfg)
        prof = empty_profile("u1", cfg.start, cfg.embedding_dim)
        M = extract_matrix(prof, sorted(corpus.articles), cfg.start, cache)
        assert np.isfinite(M).all()


@given(a=st.frozensets(st.sampled_from("abcdef"), max_size=5),
       b=st.frozensets(st.sampled_from("abcdef"), max_size=5))
def test_jaccard_symmetric(a, b):
    from newsrec.features import _jaccard
    assert _jaccard(a, b) == _jaccard(b, a)


@given(u=st.lists(st.floats(-5, 5), min_size=3, max_size=3),
       v=st.lists(st.floats(-5, 5), min_size=3, max_size=3))
def test_cosine_bounded(u, v):
    from newsrec.features import _cosine
    c = _cosine(np.array(u), np.array(v))
    assert -1.0 - 1e-12 <= c <= 1.0 + 1e-12


class TestBuildTrainingSet:
    def _day(self, cfg, offset):
        return dt.datetime.fromtimestamp(cfg.start + offset * 86400.0,
                                         tz=dt.timezone.utc).date()

    def test_equal_ratio_and_determinism(self, tiny_world):
        cfg, corpus, _ = tiny_world
        fcfg = FeatureConfig(embedding_dim=cfg.embedding_dim)
        day = self._day(cfg, 2)
        ex1 = build_training_set(corpus, day, 11, fcfg)
        ex2 = build_training_set(corpus, day, 11, fcfg)
        pos = [e for e in ex1 if e.label == 1]
        neg = [e for e in ex1 if e.label == 0]
        assert len(pos) == len(neg) > 0
        assert [(e.user_id, e.article_id, e.at, e.label) for e in ex1] == \
               [(e.user_id, e.article_id, e.at, e.label) for e in ex2]
        ex3 = build_training_set(corpus, day, 12, fcfg)
        assert [(e.user_id, e.article_id) for e in ex3 if e.label == 0] != \
               [(e.user_id, e.article_id) for e in ex1 if e.label == 0]

    def test_negative_exhaustion(self):
        arts = [make_article(f"a{i}") for i in range(6)]
        events = []
        for i in range(4):  # 4 clicks
            events.append(click("u1", f"a{i}", T0 + 60 * i))
        events.append(impression("u1", "a4", T0 + 1000))
        events.append(impression("u1", "a5", T0 + 2000))
        corpus = corpus_with_clicks(arts, events)
        day = dt.datetime.fromtimestamp(T0, tz=dt.timezone.utc).date()
        ex = build_training_set(corpus, day, 0, CFG)
        assert sum(1 for e in ex if e.label == 1) == 4
        assert sum(1 for e in ex if e.label == 0) == 2  # all that exist

    def test_clicked_impressions_not_negatives(self):
        arts = [make_article("a0"), make_article("a1")]
        events = [impression("u1", "a0", T0 + 10), click("u1", "a0", T0 + 20),
                  impression("u1", "a1", T0 + 30)]
        corpus = corpus_with_clicks(arts, events)
        day = dt.datetime.fromtimestamp(T0, tz=dt.timezone.utc).date()
        ex = build_training_set(corpus, day, 0, CFG)
        neg_ids = [e.article_id for e in ex if e.label == 0]
        assert neg_ids == ["a1"]

    def test_zero_positives_warns_and_empty(self):
        arts = [make_article("a0")]
        corpus = corpus_with_clicks(arts, [impression("u1", "a0", T0 + 10)])
        day = dt.datetime.fromtimestamp(T0, tz=dt.timezone.utc).date()
        with pytest.warns(UserWarning, match="no positive"):
            assert build_training_set(corpus, day, 0, CFG) == []
