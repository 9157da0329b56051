import numpy as np
import pytest

from newsrec.corpus import (Article, Context, Corpus, InteractionEvent, Kind,
                            SyntheticWorldConfig, WordVectors, generate_world)

T0 = 1_704_067_200.0  # 2024-01-01T00:00:00Z


def make_provider(dim=4, words=("alpha", "beta", "gamma", "delta", "epsilon")):
    rng = np.random.default_rng(42)
    return WordVectors({w: rng.normal(size=dim) for w in words}, dim)


def make_article(id, published_at=T0, section="news", tags=(), authors=(),
                 embedding=None, dim=4, word_count=100, **extra):
    """Direct Article construction for metric tests; content statistics are
    nominal unless overridden."""
    fields = dict(
        id=id,
        published_at=published_at,
        section=section,
        tags=frozenset(tags),
        authors=frozenset(authors),
        title=id,
        body="",
        word_count=word_count,
        sentence_count=extra.get("sentence_count", 5),
        paragraph_count=extra.get("paragraph_count", 2),
        char_length=extra.get("char_length", 500),
        hapax_count=extra.get("hapax_count", 10),
        dis_count=extra.get("dis_count", 5),
        embedding=np.zeros(dim) if embedding is None else np.asarray(embedding, dtype=float),
    )
    return Article(**fields)


def make_corpus(articles, events=(), dim=4):
    return Corpus(articles, events, dim)


def click(user, article, at, context=Context.OTHER):
    return InteractionEvent(user, article, at, Kind.CLICK, context)


def impression(user, article, at, context=Context.OTHER):
    return InteractionEvent(user, article, at, Kind.IMPRESSION, context)


@pytest.fixture(scope="session")
def tiny_world():
    cfg = SyntheticWorldConfig(
        seed=3, n_users=20, n_days=5, articles_per_day=10, embedding_dim=16,
        user_affinity_dim=8, vocab_size=300, n_tags=30, n_authors=10,
        n_sections=4, n_personas=3, impressions_per_session=5)
    corpus, truth = generate_world(cfg)
    return cfg, corpus, truth


@pytest.fixture(scope="session")
def noisy_world():
    cfg = SyntheticWorldConfig(
        seed=9, n_users=10, n_days=4, articles_per_day=8, embedding_dim=8,
        user_affinity_dim=8, vocab_size=200, n_tags=20, n_authors=8,
        n_sections=4, n_personas=3, impressions_per_session=5, click_noise=0.3)
    corpus, truth = generate_world(cfg)
    return cfg, corpus, truth
