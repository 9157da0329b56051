"""Offline accuracy evaluation, two-sample significance testing, treatment
comparison, and the before/after behavior-shift report.

Accuracy follows the replay protocol: per user-day with at least one click,
the day's displayed articles (clicked plus seen-not-clicked) are re-ranked
by the model trained through the previous day, and binary-gain NDCG and
P/R@k are macro-averaged over user-days.

The two-sample t statistic (pooled Student by default, Welch by flag) gets
its two-sided p-value from the regularized incomplete beta function,
evaluated by a continued fraction to 1e-10 absolute tolerance.
"""

from __future__ import annotations

import datetime as dt
import math
import warnings
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Iterable, Mapping, Optional, Sequence

import numpy as np

from .corpus import DAY, Article, Corpus, Kind, day_start
from .features import ArticleFeatureCache, UserProfile, build_profile
from .gbdt import TreeEnsemble
from .ranker import MANUAL_USER, RankedList, Section, _sort_items
from .usefulness import (AttributeKind, CoverageScope, coverage, dynamism,
                         intra_list_diversity, serendipity)


class EvalError(ValueError):
    pass


# --------------------------------------------------------------------------
# Ranking accuracy
# --------------------------------------------------------------------------

def ndcg(ranking: Sequence[str], clicked: set[str]) -> Optional[float]:
    """Binary-gain NDCG: DCG over 1-based ranks with 1/log2(i+1) discounts,
    ideal DCG places every clicked item at the top. None (no sample) when
    the ranking is empty or contains no clicked item."""
    if not ranking or not clicked:
        return None
    dcg = sum(1.0 / math.log2(i + 2) for i, aid in enumerate(ranking) if aid in clicked)
    if dcg == 0.0:
        return None
    idcg = sum(1.0 / math.log2(i + 2) for i in range(len(clicked)))
    return dcg / idcg


def precision_recall_at(ranking: Sequence[str], clicked: set[str],
                        k: int) -> Optional[tuple[float, float]]:
    """(P@k, R@k); the precision denominator stays k even for short
    rankings. None (no sample) when there are no clicks."""
    if not clicked:
        return None
    hits = sum(1 for aid in ranking[:k] if aid in clicked)
    return hits / k, hits / len(clicked)


@dataclass
class AccuracyReport:
    ndcg: float
    p_at: dict[int, float]
    r_at: dict[int, float]
    n_user_days: int

    def validate(self) -> None:
        values = [self.ndcg, *self.p_at.values(), *self.r_at.values()]
        if any(not 0.0 <= v <= 1.0 for v in values):
            raise EvalError("accuracy metrics must lie in [0, 1]")

    def to_dict(self) -> dict:
        return {
            "ndcg": self.ndcg,
            "p_at": {str(k): v for k, v in sorted(self.p_at.items())},
            "r_at": {str(k): v for k, v in sorted(self.r_at.items())},
            "n_user_days": self.n_user_days,
        }


# A scorer maps (profile, candidate articles, time) to an array of scores.
Scorer = Callable[[UserProfile, Sequence[Article], float], np.ndarray]


def ensemble_scorer(model: TreeEnsemble, cache: ArticleFeatureCache) -> Scorer:
    from .features import extract_matrix

    def score(profile: UserProfile, articles: Sequence[Article], at: float) -> np.ndarray:
        X = extract_matrix(profile, [a.id for a in articles], at, cache)
        return model.predict_matrix(X)

    return score


def scorers_from_schedule(schedule: Sequence[tuple[float, TreeEnsemble]],
                          cache: ArticleFeatureCache) -> dict[dt.date, Scorer]:
    """Map each serving day to the scorer of the model trained that night
    (i.e. on data through the previous day)."""
    out: dict[dt.date, Scorer] = {}
    for t, model in schedule:
        day = dt.datetime.fromtimestamp(day_start(t), tz=dt.timezone.utc).date()
        out[day] = ensemble_scorer(model, cache)
    return out


def _user_day_candidates(corpus: Corpus, day_ts: float
                         ) -> dict[str, tuple[set[str], list[str]]]:
    """Per user: (clicked ids, clicked + displayed-not-clicked ids)."""
    events = corpus.events_between(day_ts, day_ts + DAY)
    clicked: dict[str, set[str]] = {}
    shown: dict[str, set[str]] = {}
    for ev in events:
        if ev.kind is Kind.CLICK:
            clicked.setdefault(ev.user_id, set()).add(ev.article_id)
        else:
            shown.setdefault(ev.user_id, set()).add(ev.article_id)
    out = {}
    for uid, clicks in clicked.items():
        pool = clicks | shown.get(uid, set())
        out[uid] = (clicks, sorted(pool))
    return out


def offline_eval(corpus: Corpus, models: Mapping[dt.date, Scorer | TreeEnsemble],
                 days: Sequence[dt.date], ks: Sequence[int] = (5, 10),
                 features=None) -> AccuracyReport:
    """Replay each user-day's displayed articles through that day's model.

    `models` maps each day to the model trained through the previous day,
    either a TreeEnsemble (wrapped with the default feature schema, or
    `features` if given) or a scorer callable. User-days without clicks
    are skipped (macro-averaging over defined samples only); days with no
    model are skipped with a warning.
    """
    if any(isinstance(m, TreeEnsemble) for m in models.values()):
        from .features import FeatureConfig
        fcfg = features or FeatureConfig(embedding_dim=corpus.embedding_dim)
        cache = ArticleFeatureCache(corpus, fcfg)
        models = {d: ensemble_scorer(m, cache) if isinstance(m, TreeEnsemble) else m
                  for d, m in models.items()}
    ndcg_samples: list[float] = []
    pr_samples: dict[int, list[tuple[float, float]]] = {k: [] for k in ks}
    for day in days:
        scorer = models.get(day)
        if scorer is None:
            warnings.warn(f"no model for {day.isoformat()}; day skipped", stacklevel=2)
            continue
        day_ts = dt.datetime(day.year, day.month, day.day,
                             tzinfo=dt.timezone.utc).timestamp()
        per_user = _user_day_candidates(corpus, day_ts)
        for uid in sorted(per_user):
            clicks, pool_ids = per_user[uid]
            articles = [corpus.articles[aid] for aid in pool_ids]
            profile = build_profile(corpus, uid, day_ts)
            scores = scorer(profile, articles, day_ts)
            ranking = [aid for aid, _ in _sort_items(zip(articles, scores))]
            value = ndcg(ranking, clicks)
            if value is None:
                continue
            ndcg_samples.append(value)
            for k in ks:
                pr = precision_recall_at(ranking, clicks, k)
                assert pr is not None
                pr_samples[k].append(pr)
    if not ndcg_samples:
        raise EvalError("no user-days with clicks in the requested range")
    report = AccuracyReport(
        ndcg=sum(ndcg_samples) / len(ndcg_samples),
        p_at={k: sum(p for p, _ in v) / len(v) for k, v in pr_samples.items()},
        r_at={k: sum(r for _, r in v) / len(v) for k, v in pr_samples.items()},
        n_user_days=len(ndcg_samples),
    )
    report.validate()
    return report


# --------------------------------------------------------------------------
# Two-sample t-test
# --------------------------------------------------------------------------

class TTestVariant(Enum):
    STUDENT = "student"
    WELCH = "welch"


@dataclass(frozen=True)
class SampleSummary:
    n: int
    mean: float
    sd: float

    def to_dict(self) -> dict:
        return {"n": self.n, "mean": self.mean, "sd": self.sd}


@dataclass
class ComparisonReport:
    metric: str
    group_a: SampleSummary
    group_b: SampleSummary
    t_stat: float
    p_value: float
    significant: bool
    variant: TTestVariant = TTestVariant.STUDENT
    df: float = 0.0

    def validate(self) -> None:
        if not 0.0 <= self.p_value <= 1.0:
            raise EvalError(f"{self.metric}: p-value {self.p_value} outside [0, 1]")
        if self.significant != (self.p_value < 0.05):
            raise EvalError(f"{self.metric}: significance flag inconsistent")

    def to_dict(self) -> dict:
        return {
            "metric": self.metric,
            "group_a": self.group_a.to_dict(),
            "group_b": self.group_b.to_dict(),
            "t_stat": self.t_stat,
            "df": self.df,
            "p_value": self.p_value,
            "significant": self.significant,
            "variant": self.variant.value,
        }


_BETA_TOL = 1e-10


def _beta_cont_fraction(a: float, b: float, x: float) -> float:
    # Lentz's algorithm for the incomplete beta continued fraction.
    tiny = 1e-300
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < tiny:
        d = tiny
    d = 1.0 / d
    h = d
    for m in range(1, 400):
        m2 = 2 * m
        coef = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + coef * d
        if abs(d) < tiny:
            d = tiny
        c = 1.0 + coef / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        h *= d * c
        coef = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + coef * d
        if abs(d) < tiny:
            d = tiny
        c = 1.0 + coef / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _BETA_TOL:
            return h
    raise EvalError(f"incomplete beta did not converge (a={a}, b={b}, x={x})")


def regularized_incomplete_beta(x: float, a: float, b: float) -> float:
    """I_x(a, b) to 1e-10 absolute tolerance."""
    if x <= 0.0:
        return 0.0
    if x >= 1.0:
        return 1.0
    ln_front = (math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b)
                + a * math.log(x) + b * math.log1p(-x))
    front = math.exp(ln_front)
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _beta_cont_fraction(a, b, x) / a
    return 1.0 - front * _beta_cont_fraction(b, a, 1.0 - x) / b


def t_sf_two_sided(t: float, df: float) -> float:
    """Two-sided p-value of a t statistic."""
    if math.isinf(t):
        return 0.0
    return regularized_incomplete_beta(df / (df + t * t), df / 2.0, 0.5)


def t_test(sample_a: Sequence[float], sample_b: Sequence[float],
           variant: TTestVariant = TTestVariant.STUDENT,
           metric: str = "", alpha: float = 0.05) -> ComparisonReport:
    """Two-sample t-test. Student pools variances with df = na + nb - 2;
    Welch uses the Welch-Satterthwaite degrees of freedom."""
    a = np.asarray(sample_a, dtype=np.float64)
    b = np.asarray(sample_b, dtype=np.float64)
    if len(a) < 2 or len(b) < 2:
        raise EvalError("each sample needs n >= 2")
    if not (np.isfinite(a).all() and np.isfinite(b).all()):
        raise EvalError("samples must be finite")
    na, nb = len(a), len(b)
    ma, mb = float(a.mean()), float(b.mean())
    va, vb = float(a.var(ddof=1)), float(b.var(ddof=1))

    if variant is TTestVariant.STUDENT:
        df = float(na + nb - 2)
        sp2 = ((na - 1) * va + (nb - 1) * vb) / df
        se = math.sqrt(sp2 * (1.0 / na + 1.0 / nb))
    else:
        sa, sb = va / na, vb / nb
        se = math.sqrt(sa + sb)
        if se > 0.0:
            df = (sa + sb) ** 2 / (sa * sa / (na - 1) + sb * sb / (nb - 1))
        else:
            df = float(na + nb - 2)

    if se == 0.0:
        if ma == mb:
            t, p = 0.0, 1.0
        else:
            t = math.inf if ma > mb else -math.inf
            p = 0.0
    else:
        t = (ma - mb) / se
        p = t_sf_two_sided(t, df)

    report = ComparisonReport(
        metric=metric,
        group_a=SampleSummary(na, ma, math.sqrt(va)),
        group_b=SampleSummary(nb, mb, math.sqrt(vb)),
        t_stat=t,
        p_value=p,
        significant=p < alpha,
        variant=variant,
        df=df,
    )
    report.validate()
    return report


# --------------------------------------------------------------------------
# Metric sample collection over emission logs
# --------------------------------------------------------------------------

ALL_ATTRIBUTES = (AttributeKind.SECTION, AttributeKind.TAGS,
                  AttributeKind.AUTHORS, AttributeKind.EMBEDDING)


class _ProfileCache:
    def __init__(self, corpus: Corpus):
        self.corpus = corpus
        self._cache: dict[tuple[str, float], UserProfile] = {}

    def get(self, user_id: str, at: float) -> UserProfile:
        key = (user_id, at)
        prof = self._cache.get(key)
        if prof is None:
            prof = build_profile(self.corpus, user_id, at)
            self._cache[key] = prof
        return prof


def _mean_over_attributes(fn) -> Optional[float]:
    values = [v for v in (fn(attr) for attr in ALL_ATTRIBUTES) if v is not None]
    return sum(values) / len(values) if values else None


def collect_usefulness_samples(emissions: Sequence[RankedList], corpus: Corpus,
                               top_n: int = 5,
                               profiles: Optional[_ProfileCache] = None
                               ) -> dict[str, list[float]]:
    """Per-metric sample sets over an emission stream (lists truncated to
    top_n): dynamism between consecutive lists of the same (user, section)
    stream, per-list diversity and serendipity averaged over the four
    attributes, and per-day all-users coverage."""
    if profiles is None:
        profiles = _ProfileCache(corpus)
    samples: dict[str, list[float]] = {
        "dynamism": [], "serendipity": [], "coverage": [], "diversity": [],
    }
    ordered = sorted(emissions, key=lambda l: (l.at, l.user_id, l.section.value))
    previous: dict[tuple[str, Section], RankedList] = {}
    by_day: dict[float, list[RankedList]] = {}
    for lst in ordered:
        top = lst.top(top_n)
        key = (lst.user_id, lst.section)
        prev = previous.get(key)
        if prev is not None:
            value = dynamism(prev, top)
            if value is not None:
                samples["dynamism"].append(value)
        previous[key] = top

        articles = [corpus.articles[aid] for aid in top.ids()]
        div = _mean_over_attributes(lambda attr: intra_list_diversity(articles, attr))
        if div is not None:
            samples["diversity"].append(div)
        if articles:
            profile = profiles.get(lst.user_id, lst.at)
            ser = _mean_over_attributes(
                lambda attr: serendipity(articles, profile, attr))
            if ser is not None:
                samples["serendipity"].append(ser)
        by_day.setdefault(day_start(lst.at), []).append(top)

    for day_ts in sorted(by_day):
        published = [a.id for a in corpus.published_between(day_ts, day_ts + DAY)]
        cov = coverage(by_day[day_ts], published, CoverageScope.ALL_USERS)
        if cov is not None:
            samples["coverage"].append(cov)
    return samples


def collect_metric_samples(emissions: Sequence[RankedList], corpus: Corpus,
                           treatment: str, top_n: int = 5,
                           profiles: Optional[_ProfileCache] = None) -> list:
    """Per-attribute MetricSample rows for the audit CSV: diversity and
    serendipity per (list, attribute), dynamism per consecutive pair, and
    daily coverage in both scopes."""
    from .usefulness import MetricSample

    if profiles is None:
        profiles = _ProfileCache(corpus)
    rows: list[MetricSample] = []
    ordered = sorted(emissions, key=lambda l: (l.at, l.user_id, l.section.value))
    previous: dict[tuple[str, Section], RankedList] = {}
    by_day: dict[float, list[RankedList]] = {}
    for lst in ordered:
        top = lst.top(top_n)
        key = (lst.user_id, lst.section)
        prev = previous.get(key)
        if prev is not None:
            value = dynamism(prev, top)
            if value is not None:
                rows.append(MetricSample("dynamism", value, None, treatment,
                                         lst.section.value, lst.at))
        previous[key] = top
        articles = [corpus.articles[aid] for aid in top.ids()]
        profile = profiles.get(lst.user_id, lst.at) if articles else None
        for attr in ALL_ATTRIBUTES:
            div = intra_list_diversity(articles, attr)
            if div is not None:
                rows.append(MetricSample("diversity", div, attr, treatment,
                                         lst.section.value, lst.at))
            if articles:
                ser = serendipity(articles, profile, attr)
                if ser is not None:
                    rows.append(MetricSample("serendipity", ser, attr, treatment,
                                             lst.section.value, lst.at))
        by_day.setdefault(day_start(lst.at), []).append(top)
    for day_ts in sorted(by_day):
        published = [a.id for a in corpus.published_between(day_ts, day_ts + DAY)]
        for scope in (CoverageScope.PER_USER, CoverageScope.ALL_USERS):
            cov = coverage(by_day[day_ts], published, scope)
            if cov is not None:
                rows.append(MetricSample("coverage", cov, None, treatment,
                                         scope.value, day_ts))
    return rows


def _clicks_by_user_day_section(corpus: Corpus) -> dict[tuple[str, float, Section], set[str]]:
    """Click ids grouped by (user, day, section), using each click event's
    display context to attribute it to a section."""
    context_section = {
        "mn_widget": Section.MN_WIDGET,
        "missed_lw": Section.MISSED_LW,
        "mn_page": Section.MN_PAGE,
    }
    out: dict[tuple[str, float, Section], set[str]] = {}
    for ev in corpus.events:
        if ev.kind is not Kind.CLICK:
            continue
        section = context_section.get(ev.context.value)
        if section is None:
            continue
        key = (ev.user_id, day_start(ev.at), section)
        out.setdefault(key, set()).add(ev.article_id)
    return out


def ndcg_by_section(emissions: Sequence[RankedList], corpus: Corpus
                    ) -> dict[Section, list[float]]:
    """Table-8-style samples: per (user, day, section), the mean NDCG of
    that day's emitted lists against the user's same-section clicks."""
    clicks = _clicks_by_user_day_section(corpus)
    acc: dict[tuple[str, float, Section], list[float]] = {}
    for lst in emissions:
        if lst.section is Section.MANUAL:
            continue
        key = (lst.user_id, day_start(lst.at), lst.section)
        clicked = clicks.get(key)
        if not clicked:
            continue
        value = ndcg(lst.ids(), clicked)
        if value is not None:
            acc.setdefault(key, []).append(value)
    out: dict[Section, list[float]] = {
        Section.MN_WIDGET: [], Section.MISSED_LW: [], Section.MN_PAGE: [],
    }
    for key in sorted(acc, key=lambda k: (k[1], k[0], k[2].value)):
        out[key[2]].append(sum(acc[key]) / len(acc[key]))
    return out


def compare_treatments(emissions_a: Sequence[RankedList],
                       emissions_b: Sequence[RankedList], corpus: Corpus,
                       variant: TTestVariant = TTestVariant.STUDENT,
                       top_n: int = 5) -> list[ComparisonReport]:
    """Usefulness metrics plus per-section NDCG of two treatment streams,
    each compared with a two-sample t-test (group_a vs group_b). Metrics
    whose sample sets are too small to test (n < 2 on either side) are
    omitted from the result."""
    if not emissions_a or not emissions_b:
        raise EvalError("empty emission stream")
    profiles = _ProfileCache(corpus)
    samples_a = collect_usefulness_samples(emissions_a, corpus, top_n, profiles)
    samples_b = collect_usefulness_samples(emissions_b, corpus, top_n, profiles)
    reports = []
    for metric in ("dynamism", "serendipity", "coverage", "diversity"):
        if len(samples_a[metric]) >= 2 and len(samples_b[metric]) >= 2:
            reports.append(t_test(samples_a[metric], samples_b[metric],
                                  variant=variant, metric=metric))
    ndcg_a = ndcg_by_section(emissions_a, corpus)
    ndcg_b = ndcg_by_section(emissions_b, corpus)
    for section in (Section.MISSED_LW, Section.MN_WIDGET, Section.MN_PAGE):
        if len(ndcg_a[section]) >= 2 and len(ndcg_b[section]) >= 2:
            reports.append(t_test(ndcg_a[section], ndcg_b[section], variant=variant,
                                  metric=f"ndcg_{section.value}"))
    return reports


def compare_manual_recsys(manual_stream: Sequence[RankedList],
                          recsys_stream: Sequence[RankedList], corpus: Corpus,
                          variant: TTestVariant = TTestVariant.STUDENT
                          ) -> list[ComparisonReport]:
    """Manual-curation baseline vs personalized lists (group_a = manual).

    Updates are aligned at manual timestamps: per manual update, each user's
    most recent emission. Diversity and serendipity are compared per
    attribute over lists (manual serendipity is measured against each
    aligned user's own history); dynamism over consecutive lists (aligned
    and all-changes variants); coverage per day in both per-user and
    all-users scopes.
    """
    from .usefulness import align

    if not manual_stream or not recsys_stream:
        raise EvalError("empty emission stream")
    manual_stream = sorted(manual_stream, key=lambda l: l.at)
    pairs = align(manual_stream, recsys_stream)
    if not pairs:
        raise EvalError("alignment produced no pairs")
    profiles = _ProfileCache(corpus)
    arts = lambda lst: [corpus.articles[aid] for aid in lst.ids()]

    reports: list[ComparisonReport] = []
    for attr in ALL_ATTRIBUTES:
        manual_div = [v for lst in manual_stream
                      if (v := intra_list_diversity(arts(lst), attr)) is not None]
        recsys_div = [v for _, lst in pairs
                      if (v := intra_list_diversity(arts(lst), attr)) is not None]
        reports.append(t_test(manual_div, recsys_div, variant=variant,
                              metric=f"diversity_{attr.value}"))
    for attr in ALL_ATTRIBUTES:
        manual_ser, recsys_ser = [], []
        for manual, lst in pairs:
            profile = profiles.get(lst.user_id, manual.at)
            v = serendipity(arts(manual), profile, attr)
            if v is not None:
                manual_ser.append(v)
            v = serendipity(arts(lst), profile, attr)
            if v is not None:
                recsys_ser.append(v)
        reports.append(t_test(manual_ser, recsys_ser, variant=variant,
                              metric=f"serendipity_{attr.value}"))

    manual_dyn = [v for prev, curr in zip(manual_stream, manual_stream[1:])
                  if (v := dynamism(prev, curr)) is not None]
    aligned_by_user: dict[str, list[RankedList]] = {}
    for _, lst in pairs:
        aligned_by_user.setdefault(lst.user_id, []).append(lst)
    aligned_dyn = []
    for uid in sorted(aligned_by_user):
        lists = aligned_by_user[uid]
        aligned_dyn.extend(v for prev, curr in zip(lists, lists[1:])
                           if (v := dynamism(prev, curr)) is not None)
    all_by_user: dict[str, list[RankedList]] = {}
    for lst in sorted(recsys_stream, key=lambda l: (l.at, l.user_id)):
        all_by_user.setdefault(lst.user_id, []).append(lst)
    all_dyn = []
    for uid in sorted(all_by_user):
        lists = all_by_user[uid]
        all_dyn.extend(v for prev, curr in zip(lists, lists[1:])
                       if (v := dynamism(prev, curr)) is not None)
    reports.append(t_test(manual_dyn, aligned_dyn, variant=variant,
                          metric="dynamism_aligned"))
    reports.append(t_test(manual_dyn, all_dyn, variant=variant, metric="dynamism_all"))

    manual_by_day: dict[float, list[RankedList]] = {}
    for lst in manual_stream:
        manual_by_day.setdefault(day_start(lst.at), []).append(lst)
    recsys_by_day: dict[float, list[RankedList]] = {}
    for lst in recsys_stream:
        recsys_by_day.setdefault(day_start(lst.at), []).append(lst)
    manual_cov, per_user_cov, all_users_cov = [], [], []
    for day_ts in sorted(set(manual_by_day) & set(recsys_by_day)):
        published = [a.id for a in corpus.published_between(day_ts, day_ts + DAY)]
        if not published:
            continue
        m = coverage(manual_by_day[day_ts], published, CoverageScope.MANUAL)
        pu = coverage(recsys_by_day[day_ts], published, CoverageScope.PER_USER)
        au = coverage(recsys_by_day[day_ts], published, CoverageScope.ALL_USERS)
        if m is not None and pu is not None and au is not None:
            manual_cov.append(m)
            per_user_cov.append(pu)
            all_users_cov.append(au)
    reports.append(t_test(manual_cov, per_user_cov, variant=variant,
                          metric="coverage_per_user"))
    reports.append(t_test(manual_cov, all_users_cov, variant=variant,
                          metric="coverage_all_users"))
    return reports


def behavior_shift(corpus: Corpus, before: tuple[float, float],
                   after: tuple[float, float],
                   variant: TTestVariant = TTestVariant.STUDENT
                   ) -> list[ComparisonReport]:
    """Reading-behavior comparison between two periods: per-user daily-click
    diversity per attribute, plus all-users daily coverage of clicks."""

    def period_samples(t0: float, t1: float):
        clicks: dict[tuple[str, float], list[Article]] = {}
        for ev in corpus.events_between(t0, t1):
            if ev.kind is Kind.CLICK:
                key = (ev.user_id, day_start(ev.at))
                clicks.setdefault(key, []).append(corpus.articles[ev.article_id])
        if not clicks:
            raise EvalError("period has no clicks")
        div: dict[AttributeKind, list[float]] = {a: [] for a in ALL_ATTRIBUTES}
        for key in sorted(clicks):
            for attr in ALL_ATTRIBUTES:
                value = intra_list_diversity(clicks[key], attr)
                if value is not None:
                    div[attr].append(value)
        cov: list[float] = []
        days = sorted({d for _, d in clicks})
        for day_ts in days:
            published = {a.id for a in corpus.published_between(day_ts, day_ts + DAY)}
            if not published:
                continue
            served: set[str] = set()
            for (uid, d), arts in clicks.items():
                if d == day_ts:
                    served.update(a.id for a in arts)
            cov.append(len(served & published) / len(published))
        return div, cov

    div_before, cov_before = period_samples(*before)
    div_after, cov_after = period_samples(*after)
    reports = []
    for attr in ALL_ATTRIBUTES:
        reports.append(t_test(div_before[attr], div_after[attr], variant=variant,
                              metric=f"click_diversity_{attr.value}"))
    reports.append(t_test(cov_before, cov_after, variant=variant, metric="coverage"))
    return reports


# --------------------------------------------------------------------------
# Plain-text report tables
# --------------------------------------------------------------------------

def format_accuracy_table(report: AccuracyReport) -> str:
    ks = sorted(report.p_at)
    header = ["NDCG"] + [f"R@{k}" for k in ks] + [f"P@{k}" for k in ks]
    row = [f"{report.ndcg:.4f}"] + [f"{report.r_at[k]:.4f}" for k in ks] \
        + [f"{report.p_at[k]:.4f}" for k in ks]
    width = max(len(c) for c in header + row) + 2
    lines = ["".join(c.rjust(width) for c in header),
             "".join(c.rjust(width) for c in row),
             f"  (n_user_days = {report.n_user_days})"]
    return "\n".join(lines)


def format_comparison_table(reports: Sequence[ComparisonReport],
                            label_a: str = "A", label_b: str = "B") -> str:
    head = f"{'metric':<28}{label_a:>12}{label_b:>12}{'t':>10}{'p':>10}  sig"
    lines = [head, "-" * len(head)]
    for r in reports:
        lines.append(
            f"{r.metric:<28}{r.group_a.mean:>12.4f}{r.group_b.mean:>12.4f}"
            f"{r.t_stat:>10.3f}{r.p_value:>10.4f}  {'*' if r.significant else ''}"
        )
    return "\n".join(lines)
