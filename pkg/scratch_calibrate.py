"""Scratch: calibrate the reference world against acceptance criteria 4-6."""
import sys
import time
import datetime as dt
import numpy as np

sys.path.insert(0, "src")
from newsrec.corpus import DAY, day_start, generate_world
from newsrec.evaluation import (TTestVariant, compare_manual_recsys,
                                compare_treatments, ndcg_by_section, offline_eval,
                                scorers_from_schedule)
from newsrec.features import ArticleFeatureCache
from newsrec.ranker import (PipelineConfig, Section, Treatment, manual_lists,
                            run_pipeline, train_schedule)
from newsrec.worlds import reference_pipeline, reference_world

t0 = time.time()
mark = lambda msg: print(f"[{time.time()-t0:7.1f}s] {msg}", flush=True)

wcfg = reference_world()
corpus, truth = generate_world(wcfg)
mark(f"world: {len(corpus.articles)} articles, {len(corpus.events)} events, "
     f"{len(corpus.user_ids())} users")
clicks = sum(1 for e in corpus.events if e.kind.value == "click")
mark(f"clicks {clicks}, imps {len(corpus.events)-clicks}, rate {clicks/(len(corpus.events)-clicks):.3f}")

base_cfg = reference_pipeline(wcfg, Treatment.BASELINE)
dyn_cfg = reference_pipeline(wcfg, Treatment.DYNAMISM)
cache = ArticleFeatureCache(corpus, base_cfg.features)

schedule = train_schedule(corpus, base_cfg, cache=cache)
mark(f"trained {len(schedule)} nightly models")

# criterion 4: oracle + random scorers
def oracle(profile, articles, at):
    return np.array([truth.click_prob(profile.user_id, a.id) for a in articles])

days = sorted({dt.datetime.fromtimestamp(day_start(e.at), tz=dt.timezone.utc).date()
               for e in corpus.events})
rep = offline_eval(corpus, {d: oracle for d in days}, days)
mark(f"oracle NDCG {rep.ndcg:.4f} over {rep.n_user_days} user-days")

rng = np.random.default_rng(0)
def random_scorer(profile, articles, at):
    return rng.random(len(articles))
rep_r = offline_eval(corpus, {d: random_scorer for d in days}, days)

# analytic base rate
from newsrec.evaluation import _user_day_candidates
import datetime as dtm
expected = []
for d in days:
    ts = dtm.datetime(d.year, d.month, d.day, tzinfo=dtm.timezone.utc).timestamp()
    for uid, (clk, pool) in _user_day_candidates(corpus, ts).items():
        n, m = len(pool), len(clk)
        expected.append(m / n if n >= 5 else m / 5)
mark(f"random P@5 {rep_r.p_at[5]:.4f} vs analytic {np.mean(expected):.4f} "
     f"(diff {abs(rep_r.p_at[5]-np.mean(expected)):.4f})")

users = corpus.user_ids()
ems_b = run_pipeline(corpus, base_cfg, users, models=schedule)
mark(f"baseline run: {len(ems_b)} lists")
ems_d = run_pipeline(corpus, dyn_cfg, users, models=schedule)
mark(f"dynamism run: {len(ems_d)} lists")

reports = compare_treatments(ems_b, ems_d, corpus)
for r in reports:
    mark(f"  {r.metric:16s} base={r.group_a.mean:.4f} dyn={r.group_b.mean:.4f} "
         f"t={r.t_stat:8.3f} p={r.p_value:.2e} sig={r.significant} "
         f"(n={r.group_a.n}/{r.group_b.n})")

manual = manual_lists(corpus, base_cfg.t_start, corpus.time_span()[1],
                      rng_seed=wcfg.seed * 7919 + 11)
widget = [l for l in ems_b if l.section is Section.MN_WIDGET and not l.fallback]
s1 = compare_manual_recsys(manual, widget, corpus)
for r in s1:
    mark(f"  {r.metric:24s} manual={r.group_a.mean:.4f} recsys={r.group_b.mean:.4f} "
         f"t={r.t_stat:8.3f} p={r.p_value:.2e} sig={r.significant} "
         f"(n={r.group_a.n}/{r.group_b.n})")
mark("done")
