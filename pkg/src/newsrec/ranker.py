"""Serving pipeline: candidate selection, per-user ranking, section slicing,
the recency re-ranker, and the simulated hourly/nightly schedule.

The pipeline walks a simulated clock over the corpus horizon. Nightly it
trains a fresh model on the trailing seven days of implicit feedback; every
refresh interval (and immediately after each click) it regenerates the
clicking user's lists. Each regeneration emits three RankedLists: the
fresh-articles widget (top 5, <= 24h old), the missed-last-week strip
(top 5, older than 24h but within 7 days), and the full personalized page.

The recency score of an article published at t is

    dyn(t) = 1 - 1 / (1 + ln(1 + (t - t_start) / 3600))

clamped to 0 before t_start, and the re-ranker orders by
lambda * model_score + (1 - lambda) * dyn.
"""

from __future__ import annotations

import datetime as dt
import json
import math
import warnings
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np

from .corpus import DAY, WEEK, Article, Corpus, Kind, day_start
from .features import (ArticleFeatureCache, FeatureConfig, UserProfile,
                       build_profile, build_training_set, extract_matrix)
from .gbdt import GbdtError, TrainConfig, TreeEnsemble, train

MANUAL_USER = "__manual__"


class RankerError(ValueError):
    pass


class Section(Enum):
    MANUAL = "manual"
    MN_WIDGET = "mn_widget"
    MISSED_LW = "missed_lw"
    MN_PAGE = "mn_page"


class Treatment(Enum):
    BASELINE = "baseline"
    DYNAMISM = "dynamism"


SECTION_CAPS = {Section.MANUAL: 5, Section.MN_WIDGET: 5, Section.MISSED_LW: 5}


@dataclass(frozen=True, slots=True)
class RankedList:
    user_id: str
    section: Section
    at: float
    items: tuple[tuple[str, float], ...]
    fallback: bool = False
    rec_labels: Optional[tuple[bool, ...]] = None

    def __post_init__(self):
        cap = SECTION_CAPS.get(self.section)
        if cap is not None and len(self.items) > cap:
            raise RankerError(f"{self.section.value} list exceeds cap {cap}")
        ids = [aid for aid, _ in self.items]
        if len(set(ids)) != len(ids):
            raise RankerError("duplicate article ids in ranked list")
        scores = [s for _, s in self.items]
        if any(scores[i] < scores[i + 1] for i in range(len(scores) - 1)):
            raise RankerError("items must be sorted non-increasing by score")

    def ids(self) -> list[str]:
        return [aid for aid, _ in self.items]

    def top(self, n: int) -> "RankedList":
        return RankedList(self.user_id, self.section, self.at, self.items[:n],
                          self.fallback,
                          self.rec_labels[:n] if self.rec_labels else None)


@dataclass(frozen=True)
class PipelineConfig:
    t_start: float
    candidate_window: float = WEEK
    refresh_interval: float = 3600.0
    nightly_train_hour: int = 2
    treatment: Treatment = Treatment.BASELINE
    blend_lambda: float = 0.5
    rec_label_threshold: float = 0.5
    rng_seed: int = 0
    train: TrainConfig = field(default_factory=TrainConfig)
    features: FeatureConfig = field(default_factory=FeatureConfig)
    mnpage_cap: Optional[int] = None

    def __post_init__(self):
        if not 0.0 <= self.blend_lambda <= 1.0:
            raise RankerError("lambda must be in [0, 1]")
        if self.candidate_window <= 0:
            raise RankerError("candidate_window must be > 0")
        if self.refresh_interval <= 0:
            raise RankerError("refresh_interval must be > 0")
        if not 0 <= self.nightly_train_hour <= 23:
            raise RankerError("nightly_train_hour must be an hour of day")


def candidates(corpus: Corpus, at: float, window: float) -> list[Article]:
    """Articles published in the half-open window (at - window, at]."""
    if window <= 0:
        raise RankerError("window must be > 0")
    return corpus.published_between(at - window, at)


def _sort_items(scored: Iterable[tuple[Article, float]]) -> list[tuple[str, float]]:
    # Score descending, then newest publication, then lexicographic id.
    ordered = sorted(scored, key=lambda p: (-p[1], -p[0].published_at, p[0].id))
    return [(a.id, float(s)) for a, s in ordered]


def rank(model: TreeEnsemble, profile: UserProfile, cands: Sequence[Article],
         at: float, cache: ArticleFeatureCache) -> RankedList:
    """Score candidates for one user and return the full MNPage ranking."""
    if not cands:
        return RankedList(profile.user_id, Section.MN_PAGE, at, ())
    ids = [a.id for a in cands]
    X = extract_matrix(profile, ids, at, cache)
    scores = model.predict_matrix(X)
    items = _sort_items(zip(cands, scores))
    return RankedList(profile.user_id, Section.MN_PAGE, at, tuple(items))


def slice_sections(full: RankedList, at: float, corpus: Corpus) -> dict[Section, RankedList]:
    """Carve the fresh widget and missed-last-week strips out of the full
    list, preserving its order. Age exactly 24h still counts as fresh."""
    widget: list[tuple[str, float]] = []
    missed: list[tuple[str, float]] = []
    for aid, score in full.items:
        age = at - corpus.articles[aid].published_at
        if age <= DAY:
            if len(widget) < 5:
                widget.append((aid, score))
        elif age <= WEEK:
            if len(missed) < 5:
                missed.append((aid, score))
    make = lambda section, items: RankedList(full.user_id, section, at, tuple(items),
                                             fallback=full.fallback)
    return {
        Section.MN_WIDGET: make(Section.MN_WIDGET, widget),
        Section.MISSED_LW: make(Section.MISSED_LW, missed),
        Section.MN_PAGE: RankedList(full.user_id, Section.MN_PAGE, at, full.items,
                                    fallback=full.fallback),
    }


def dyn_score_at(published_at: float, t_start: float) -> float:
    """Recency score in [0, 1); 0 for anything published at or before t_start."""
    hours = (published_at - t_start) / 3600.0
    if hours <= 0.0:
        return 0.0
    return 1.0 - 1.0 / (1.0 + math.log(1.0 + hours))


def dyn_score(article: Article, t_start: float) -> float:
    return dyn_score_at(article.published_at, t_start)


def rerank(full: RankedList, blend_lambda: float, t_start: float,
           corpus: Corpus) -> RankedList:
    """Blend model scores with recency: lambda*S + (1-lambda)*dyn, then
    re-sort. Membership is unchanged; lambda=1 keeps the input order."""
    if not 0.0 <= blend_lambda <= 1.0:
        raise RankerError("lambda must be in [0, 1]")
    rescored = [
        (corpus.articles[aid],
         blend_lambda * score + (1.0 - blend_lambda) * dyn_score_at(
             corpus.articles[aid].published_at, t_start))
        for aid, score in full.items
    ]
    return RankedList(full.user_id, full.section, full.at,
                      tuple(_sort_items(rescored)), fallback=full.fallback)


# --------------------------------------------------------------------------
# Nightly training schedule
# --------------------------------------------------------------------------

def _nightly_times(cfg: PipelineConfig, t_end: float) -> list[float]:
    first_day = day_start(cfg.t_start)
    times = []
    t = first_day + cfg.nightly_train_hour * 3600.0
    while t < t_end:
        if t >= cfg.t_start:
            times.append(t)
        t += DAY
    return times


def train_schedule(corpus: Corpus, cfg: PipelineConfig,
                   t_end: Optional[float] = None,
                   cache: Optional[ArticleFeatureCache] = None
                   ) -> list[tuple[float, TreeEnsemble]]:
    """Train the nightly models over the horizon.

    At each nightly time, examples are built per-day over the previous
    seven calendar days; nights without enough signal produce no model (the
    previous one stays active). Per-day sampling seeds derive from rng_seed
    and the day ordinal, so the schedule is reproducible.
    """
    if t_end is None:
        t_end = corpus.time_span()[1]
    if cache is None:
        cache = ArticleFeatureCache(corpus, cfg.features)
    schedule: list[tuple[float, TreeEnsemble]] = []
    for t in _nightly_times(cfg, t_end):
        day0 = dt.datetime.fromtimestamp(day_start(t), tz=dt.timezone.utc).date()
        examples = []
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            for back in range(7, 0, -1):
                day = day0 - dt.timedelta(days=back)
                seed = cfg.rng_seed * 100003 + day.toordinal()
                examples.extend(build_training_set(corpus, day, seed, cfg.features,
                                                   cache=cache))
        labels = {ex.label for ex in examples}
        if labels != {0, 1}:
            continue
        schedule.append((t, train(examples, cfg.train)))
    return schedule


# --------------------------------------------------------------------------
# Pipeline
# --------------------------------------------------------------------------

def _fallback_list(user_id: str, cands: Sequence[Article], at: float,
                   t_start: float) -> RankedList:
    items = _sort_items((a, dyn_score_at(a.published_at, t_start)) for a in cands)
    return RankedList(user_id, Section.MN_PAGE, at, tuple(items), fallback=True)


def _emit_user(out: list[RankedList], corpus: Corpus, cfg: PipelineConfig,
               cache: ArticleFeatureCache, model: Optional[TreeEnsemble],
               user_id: str, at: float) -> None:
    cands = candidates(corpus, at, cfg.candidate_window)
    if model is None:
        full = _fallback_list(user_id, cands, at, cfg.t_start)
        labels: dict[str, bool] = {aid: False for aid, _ in full.items}
    else:
        profile = build_profile(corpus, user_id, at)
        full = rank(model, profile, cands, at, cache)
        labels = {aid: s >= cfg.rec_label_threshold for aid, s in full.items}
        if cfg.treatment is Treatment.DYNAMISM:
            full = rerank(full, cfg.blend_lambda, cfg.t_start, corpus)
    sections = slice_sections(full, at, corpus)
    for section in (Section.MN_WIDGET, Section.MISSED_LW, Section.MN_PAGE):
        lst = sections[section]
        if section is Section.MN_PAGE and cfg.mnpage_cap is not None:
            lst = lst.top(cfg.mnpage_cap)
        out.append(RankedList(lst.user_id, lst.section, lst.at, lst.items,
                              fallback=lst.fallback,
                              rec_labels=tuple(labels[aid] for aid, _ in lst.items)))


def run_pipeline(corpus: Corpus, cfg: PipelineConfig, users: Sequence[str],
                 t_end: Optional[float] = None,
                 models: Optional[Sequence[tuple[float, TreeEnsemble]]] = None
                 ) -> list[RankedList]:
    """Simulate the serving schedule over [t_start, t_end).

    Emits, in chronological order, every user's section lists at each
    refresh tick plus an extra regeneration for a user immediately after
    each of their clicks. Until the first nightly model exists users get
    recency-ordered lists flagged as fallback. Pass a precomputed
    `models` schedule (e.g. from train_schedule) to share training across
    treatments; by default it is computed here.
    """
    if t_end is None:
        t_end = corpus.time_span()[1]
    if t_end <= cfg.t_start:
        raise RankerError("empty horizon")
    cache = ArticleFeatureCache(corpus, cfg.features)
    if models is None:
        models = train_schedule(corpus, cfg, t_end, cache=cache)
    model_times = [t for t, _ in models]

    # Event queue ordered by (time, priority): training precedes refreshes,
    # refreshes precede click triggers at equal timestamps.
    TRAIN, REFRESH, CLICK = 0, 1, 2
    queue: list[tuple[float, int, Optional[str]]] = []
    queue.extend((t, TRAIN, None) for t in model_times)
    t = cfg.t_start
    while t < t_end:
        queue.append((t, REFRESH, None))
        t += cfg.refresh_interval
    user_set = set(users)
    for ev in corpus.events_between(cfg.t_start, t_end):
        if ev.kind is Kind.CLICK and ev.user_id in user_set:
            queue.append((ev.at, CLICK, ev.user_id))
    queue.sort(key=lambda q: (q[0], q[1], q[2] or ""))

    active: Optional[TreeEnsemble] = None
    next_model = 0
    out: list[RankedList] = []
    ordered_users = sorted(user_set)
    for at, kind, uid in queue:
        if kind == TRAIN:
            active = models[next_model][1]
            next_model += 1
        elif kind == REFRESH:
            for user in ordered_users:
                _emit_user(out, corpus, cfg, cache, active, user, at)
        else:
            _emit_user(out, corpus, cfg, cache, active, uid, at)
    return out


# --------------------------------------------------------------------------
# Manual (editorial) baseline
# --------------------------------------------------------------------------

def manual_lists(corpus: Corpus, t_start: float, t_end: float,
                 path: Optional[str | Path] = None, rng_seed: int = 0,
                 updates_range: tuple[int, int] = (8, 16)) -> list[RankedList]:
    """Editor-curated top-5 stream: loaded from JSONL when a path is given,
    otherwise synthesized at irregular times (uniform count per day within
    `updates_range`, averaging ~12/day) by a non-personalized
    popularity-plus-noise score over the trailing 24h of publications."""
    if path is not None:
        return _manual_from_file(path)

    rng = np.random.default_rng(rng_seed)
    click_counts: dict[str, int] = {}
    click_events = [(e.at, e.article_id) for e in corpus.events if e.kind is Kind.CLICK]
    click_pos = 0

    out: list[RankedList] = []
    day = day_start(t_start)
    while day < t_end:
        n_updates = int(rng.integers(updates_range[0], updates_range[1] + 1))
        times = np.sort(rng.uniform(6 * 3600, 23 * 3600, size=n_updates))
        for offset in times:
            at = day + float(offset)
            if not t_start <= at < t_end:
                continue
            while click_pos < len(click_events) and click_events[click_pos][0] <= at:
                aid = click_events[click_pos][1]
                click_counts[aid] = click_counts.get(aid, 0) + 1
                click_pos += 1
            pool = corpus.published_between(at - DAY, at)
            if not pool:
                continue
            # log damping keeps editor noise relevant once clicks accumulate
            scored = [(a, math.log1p(click_counts.get(a.id, 0)) + 1.5 * rng.random())
                      for a in pool]
            items = _sort_items(scored)[:5]
            out.append(RankedList(MANUAL_USER, Section.MANUAL, at, tuple(items)))
        day += DAY
    return out


def _manual_from_file(path: str | Path) -> list[RankedList]:
    out: list[RankedList] = []
    with Path(path).open("r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            obj = json.loads(line)
            ids = obj["items"]
            if len(ids) > 5:
                raise RankerError(f"{path}:{lineno}: manual list longer than 5")
            items = tuple((aid, float(len(ids) - i)) for i, aid in enumerate(ids))
            out.append(RankedList(MANUAL_USER, Section.MANUAL, float(obj["at"]), items))
    out.sort(key=lambda l: l.at)
    return out


# --------------------------------------------------------------------------
# Emission log (the substrate all metrics consume)
# --------------------------------------------------------------------------

def write_emissions(path: str | Path, emissions: Iterable[RankedList]) -> None:
    with Path(path).open("w", encoding="utf-8") as fh:
        for lst in emissions:
            record = {
                "user": lst.user_id,
                "section": lst.section.value,
                "at": lst.at,
                "ids": [aid for aid, _ in lst.items],
                "scores": [s for _, s in lst.items],
                "fallback": lst.fallback,
            }
            if lst.rec_labels is not None:
                record["rec_labels"] = list(lst.rec_labels)
            fh.write(json.dumps(record, sort_keys=True) + "\n")


def read_emissions(path: str | Path) -> list[RankedList]:
    out: list[RankedList] = []
    with Path(path).open("r", encoding="utf-8") as fh:
        for line in fh:
            if not line.strip():
                continue
            obj = json.loads(line)
            labels = obj.get("rec_labels")
            out.append(RankedList(
                user_id=obj["user"],
                section=Section(obj["section"]),
                at=float(obj["at"]),
                items=tuple(zip(obj["ids"], map(float, obj["scores"]))),
                fallback=bool(obj.get("fallback", False)),
                rec_labels=tuple(labels) if labels is not None else None,
            ))
    return out
