"""Feature extraction: (user history, article, time) -> fixed-width vectors.

Three families mirror the serving model's inputs: article features (hashed
section, counts, temporal, stylometric, embedding coordinates), user
features (7-day reading aggregates), and user-article compatibility
features (overlaps, cosine, length ratio, article age).

The exact schema is documented by `feature_names` / `write_schema`; width is
a function of the config (section hash buckets + embedding dim).
"""

from __future__ import annotations

import datetime as dt
import json
import warnings
import zlib
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .corpus import DAY, WEEK, Article, Corpus, Kind, day_start

SCHEMA_VERSION = 1


class FeatureError(ValueError):
    pass


@dataclass(frozen=True)
class FeatureConfig:
    embedding_dim: int = 32
    section_buckets: int = 16
    top_k: int = 3

    @property
    def width(self) -> int:
        return self.section_buckets + 10 + self.embedding_dim + 5 + 6


def stable_bucket(value: str, buckets: int) -> int:
    """Deterministic string -> bucket index (crc32; stable across runs)."""
    return zlib.crc32(value.encode("utf-8")) % buckets


def feature_names(cfg: FeatureConfig) -> list[str]:
    names = [f"art_section_hash_{i}" for i in range(cfg.section_buckets)]
    names += [
        "art_tag_count", "art_author_count", "art_pub_hour", "art_pub_dow",
        "art_word_count", "art_sentence_count", "art_paragraph_count",
        "art_char_length", "art_hapax_count", "art_dis_count",
    ]
    names += [f"art_emb_{i}" for i in range(cfg.embedding_dim)]
    names += [
        "user_mean_word_count", "user_n_clicks",
        "user_topk_tag_mass", "user_topk_author_mass", "user_topk_section_mass",
    ]
    names += [
        "ua_tag_jaccard", "ua_author_jaccard", "ua_section_match",
        "ua_embedding_cosine", "ua_length_ratio", "ua_age_hours",
    ]
    assert len(names) == cfg.width
    return names


def write_schema(cfg: FeatureConfig, path: str | Path) -> None:
    """Dump the ordered feature schema for audit."""
    payload = {
        "schema_version": SCHEMA_VERSION,
        "width": cfg.width,
        "section_buckets": cfg.section_buckets,
        "embedding_dim": cfg.embedding_dim,
        "top_k": cfg.top_k,
        "features": feature_names(cfg),
    }
    Path(path).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n",
                          encoding="utf-8")


@dataclass
class UserProfile:
    """Rolling aggregate of one user's clicks in [window_start, window_end)."""

    user_id: str
    window_start: float
    window_end: float
    tag_freq: dict[str, int]
    author_freq: dict[str, int]
    section_freq: dict[str, int]
    mean_word_count: float
    mean_embedding: np.ndarray
    n_clicks: int


def empty_profile(user_id: str, as_of: float, embedding_dim: int) -> UserProfile:
    return UserProfile(
        user_id=user_id,
        window_start=as_of - WEEK,
        window_end=as_of,
        tag_freq={},
        author_freq={},
        section_freq={},
        mean_word_count=0.0,
        mean_embedding=np.zeros(embedding_dim),
        n_clicks=0,
    )


def build_profile(corpus: Corpus, user_id: str, as_of: float) -> UserProfile:
    """Aggregate the user's Click events with at in [as_of - 7d, as_of).

    Unknown users get an empty profile; impressions never contribute.
    """
    profile = empty_profile(user_id, as_of, corpus.embedding_dim)
    clicks = corpus.clicks_of(user_id)
    if not clicks:
        return profile
    emb_total = np.zeros(corpus.embedding_dim)
    wc_total = 0
    n = 0
    for ev in clicks:
        if not (as_of - WEEK <= ev.at < as_of):
            continue
        art = corpus.articles[ev.article_id]
        for t in art.tags:
            profile.tag_freq[t] = profile.tag_freq.get(t, 0) + 1
        for a in art.authors:
            profile.author_freq[a] = profile.author_freq.get(a, 0) + 1
        profile.section_freq[art.section] = profile.section_freq.get(art.section, 0) + 1
        emb_total += art.embedding
        wc_total += art.word_count
        n += 1
    if n:
        profile.n_clicks = n
        profile.mean_word_count = wc_total / n
        profile.mean_embedding = emb_total / n
    return profile


@dataclass(frozen=True)
class FeatureVector:
    values: np.ndarray
    schema_version: int = SCHEMA_VERSION


@dataclass(frozen=True, slots=True)
class LabeledExample:
    features: FeatureVector
    label: int
    user_id: str
    article_id: str
    at: float


def _jaccard(a: frozenset, b: set | frozenset) -> float:
    union = len(a | b)
    return len(a & b) / union if union else 0.0


def _topk_mass(freq: dict[str, int], k: int) -> float:
    total = sum(freq.values())
    if total == 0:
        return 0.0
    top = sorted(freq.values(), reverse=True)[:k]
    return sum(top) / total


def _cosine(u: np.ndarray, v: np.ndarray) -> float:
    nu = np.linalg.norm(u)
    nv = np.linalg.norm(v)
    if nu == 0.0 or nv == 0.0:
        return 0.0
    return float(u @ v / (nu * nv))


def _pub_hour(ts: float) -> float:
    return float(int(ts % DAY) // 3600)


def _pub_dow(ts: float) -> float:
    # Epoch day 0 (1970-01-01) was a Thursday; Monday = 0.
    return float((int(ts // DAY) + 3) % 7)


def extract(profile: UserProfile, article: Article, at: float,
            cfg: FeatureConfig) -> FeatureVector:
    """Pure feature map; see `feature_names` for the exact layout.

    Conventions for degenerate inputs: empty profile gives zero overlaps,
    cosine 0, length ratio 1; a zero mean word count also pins the ratio
    to 1 so every feature stays finite.
    """
    if article.embedding.shape != profile.mean_embedding.shape:
        raise FeatureError(
            f"embedding dim mismatch: article {article.embedding.shape} vs "
            f"profile {profile.mean_embedding.shape}")
    out = np.zeros(cfg.width)
    out[stable_bucket(article.section, cfg.section_buckets)] = 1.0
    base = cfg.section_buckets
    out[base + 0] = len(article.tags)
    out[base + 1] = len(article.authors)
    out[base + 2] = _pub_hour(article.published_at)
    out[base + 3] = _pub_dow(article.published_at)
    out[base + 4] = article.word_count
    out[base + 5] = article.sentence_count
    out[base + 6] = article.paragraph_count
    out[base + 7] = article.char_length
    out[base + 8] = article.hapax_count
    out[base + 9] = article.dis_count
    emb0 = base + 10
    out[emb0:emb0 + cfg.embedding_dim] = article.embedding

    user0 = emb0 + cfg.embedding_dim
    out[user0 + 0] = profile.mean_word_count
    out[user0 + 1] = profile.n_clicks
    out[user0 + 2] = _topk_mass(profile.tag_freq, cfg.top_k)
    out[user0 + 3] = _topk_mass(profile.author_freq, cfg.top_k)
    out[user0 + 4] = _topk_mass(profile.section_freq, cfg.top_k)

    ua0 = user0 + 5
    out[ua0 + 0] = _jaccard(article.tags, set(profile.tag_freq))
    out[ua0 + 1] = _jaccard(article.authors, set(profile.author_freq))
    out[ua0 + 2] = 1.0 if profile.section_freq.get(article.section, 0) > 0 else 0.0
    out[ua0 + 3] = _cosine(profile.mean_embedding, article.embedding)
    out[ua0 + 4] = (article.word_count / profile.mean_word_count
                    if profile.mean_word_count > 0 else 1.0)
    out[ua0 + 5] = (at - article.published_at) / 3600.0
    return FeatureVector(out)


class ArticleFeatureCache:
    """Precomputed per-article blocks so scoring can run matrix-at-a-time.

    Built once per corpus + config; `extract_matrix` then assembles a
    (n_articles, width) matrix for one profile with numpy only.
    """

    def __init__(self, corpus: Corpus, cfg: FeatureConfig):
        self.cfg = cfg
        self.ids = sorted(corpus.articles)
        self.index = {aid: i for i, aid in enumerate(self.ids)}
        arts = [corpus.articles[aid] for aid in self.ids]
        n = len(arts)

        self.static = np.zeros((n, cfg.section_buckets + 10 + cfg.embedding_dim))
        for i, a in enumerate(arts):
            self.static[i, stable_bucket(a.section, cfg.section_buckets)] = 1.0
            b = cfg.section_buckets
            self.static[i, b:b + 10] = (
                len(a.tags), len(a.authors), _pub_hour(a.published_at),
                _pub_dow(a.published_at), a.word_count, a.sentence_count,
                a.paragraph_count, a.char_length, a.hapax_count, a.dis_count)
            self.static[i, b + 10:] = a.embedding

        self.tag_vocab = sorted({t for a in arts for t in a.tags})
        self.author_vocab = sorted({x for a in arts for x in a.authors})
        tag_ix = {t: j for j, t in enumerate(self.tag_vocab)}
        author_ix = {x: j for j, x in enumerate(self.author_vocab)}
        self.tag_mat = np.zeros((n, len(self.tag_vocab)), dtype=bool)
        self.author_mat = np.zeros((n, len(self.author_vocab)), dtype=bool)
        for i, a in enumerate(arts):
            for t in a.tags:
                self.tag_mat[i, tag_ix[t]] = True
            for x in a.authors:
                self.author_mat[i, author_ix[x]] = True
        self.tag_counts = self.tag_mat.sum(axis=1)
        self.author_counts = self.author_mat.sum(axis=1)
        self.sections = [a.section for a in arts]
        self.word_counts = np.array([a.word_count for a in arts], dtype=np.float64)
        self.published = np.array([a.published_at for a in arts])
        self.emb = np.stack([a.embedding for a in arts]) if n else np.zeros((0, cfg.embedding_dim))
        self.emb_norm = np.linalg.norm(self.emb, axis=1) if n else np.zeros(0)
        self._tag_ix = tag_ix
        self._author_ix = author_ix

    def rows(self, article_ids: Sequence[str]) -> np.ndarray:
        return np.array([self.index[aid] for aid in article_ids], dtype=np.intp)


def extract_matrix(profile: UserProfile, article_ids: Sequence[str], at: float,
                   cache: ArticleFeatureCache) -> np.ndarray:
    """Vectorized `extract` over many articles for a single profile."""
    cfg = cache.cfg
    rows = cache.rows(article_ids)
    n = len(rows)
    out = np.zeros((n, cfg.width))
    out[:, :cache.static.shape[1]] = cache.static[rows]

    user0 = cfg.section_buckets + 10 + cfg.embedding_dim
    out[:, user0 + 0] = profile.mean_word_count
    out[:, user0 + 1] = profile.n_clicks
    out[:, user0 + 2] = _topk_mass(profile.tag_freq, cfg.top_k)
    out[:, user0 + 3] = _topk_mass(profile.author_freq, cfg.top_k)
    out[:, user0 + 4] = _topk_mass(profile.section_freq, cfg.top_k)

    ua0 = user0 + 5
    tag_vec = np.zeros(len(cache.tag_vocab), dtype=bool)
    for t in profile.tag_freq:
        j = cache._tag_ix.get(t)
        if j is not None:
            tag_vec[j] = True
    author_vec = np.zeros(len(cache.author_vocab), dtype=bool)
    for x in profile.author_freq:
        j = cache._author_ix.get(x)
        if j is not None:
            author_vec[j] = True
    # bool @ bool would OR instead of count; cast the profile side to int
    inter_t = cache.tag_mat[rows] @ tag_vec.astype(np.int64)
    union_t = cache.tag_counts[rows] + tag_vec.sum() - inter_t
    np.divide(inter_t, union_t, out=out[:, ua0 + 0], where=union_t > 0,
              casting="unsafe")
    inter_a = cache.author_mat[rows] @ author_vec.astype(np.int64)
    union_a = cache.author_counts[rows] + author_vec.sum() - inter_a
    np.divide(inter_a, union_a, out=out[:, ua0 + 1], where=union_a > 0,
              casting="unsafe")

    read_sections = {s for s, c in profile.section_freq.items() if c > 0}
    out[:, ua0 + 2] = [1.0 if cache.sections[r] in read_sections else 0.0 for r in rows]

    pn = np.linalg.norm(profile.mean_embedding)
    if pn > 0:
        denom = cache.emb_norm[rows] * pn
        dots = cache.emb[rows] @ profile.mean_embedding
        np.divide(dots, denom, out=out[:, ua0 + 3], where=denom > 0)

    if profile.mean_word_count > 0:
        out[:, ua0 + 4] = cache.word_counts[rows] / profile.mean_word_count
    else:
        out[:, ua0 + 4] = 1.0
    out[:, ua0 + 5] = (at - cache.published[rows]) / 3600.0
    return out


def build_training_set(corpus: Corpus, day: dt.date, rng_seed: int,
                       cfg: FeatureConfig,
                       cache: Optional[ArticleFeatureCache] = None) -> list[LabeledExample]:
    """Implicit-feedback examples for one day: every click is a positive;
    negatives are an equal-size uniform sample (without replacement, seeded)
    of the day's impressions whose (user, article) was not clicked that day.

    Features are extracted with each user's profile as of the event time.
    """
    t0 = dt.datetime(day.year, day.month, day.day, tzinfo=dt.timezone.utc).timestamp()
    day_events = corpus.events_between(t0, t0 + DAY)
    clicks = [e for e in day_events if e.kind is Kind.CLICK]
    clicked_pairs = {(e.user_id, e.article_id) for e in clicks}
    candidates = [e for e in day_events
                  if e.kind is Kind.IMPRESSION
                  and (e.user_id, e.article_id) not in clicked_pairs]

    if not clicks:
        warnings.warn(f"no positive examples on {day.isoformat()}", stacklevel=2)
        return []

    candidates.sort(key=lambda e: (e.at, e.user_id, e.article_id))
    rng = np.random.default_rng(rng_seed)
    take = min(len(clicks), len(candidates))
    if take < len(candidates):
        chosen = sorted(rng.choice(len(candidates), size=take, replace=False))
        negatives = [candidates[i] for i in chosen]
    else:
        negatives = candidates

    if cache is None:
        cache = ArticleFeatureCache(corpus, cfg)
    examples: list[LabeledExample] = []
    profile_cache: dict[tuple[str, float], UserProfile] = {}
    for ev, label in [(e, 1) for e in clicks] + [(e, 0) for e in negatives]:
        key = (ev.user_id, ev.at)
        prof = profile_cache.get(key)
        if prof is None:
            prof = build_profile(corpus, ev.user_id, ev.at)
            profile_cache[key] = prof
        row = extract_matrix(prof, [ev.article_id], ev.at, cache)[0]
        examples.append(LabeledExample(FeatureVector(row), label, ev.user_id,
                                       ev.article_id, ev.at))
    examples.sort(key=lambda ex: (ex.at, ex.user_id, ex.article_id, -ex.label))
    return examples
