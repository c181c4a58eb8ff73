"""
Choosing a notification rule
============================

Sweep three rule families over a noisy synthetic cohort and compare them by
the area under their notification precision-recall points.
"""

from cmeval import RuleFamily, Schedule, SynthConfig, gen_cohort, sweep_rules
from cmeval.synthgen import DetectorModel, EpisodeProcess
from cmeval.timeline import DAY, HOUR, MINUTE

# a detector that is right 80 % of the time on clean signal
config = SynthConfig(seed=3, n_subjects=30, horizon=10 * DAY, attributes={},
                     episodes=EpisodeProcess(mean_on=6 * HOUR, mean_off=2 * DAY),
                     detector=DetectorModel(p_correct_clean=0.8, score_noise_sd=0.2))
ds = gen_cohort(config).dataset

# one-minute measurements every half hour
schedule = Schedule(span=MINUTE, period=30 * MINUTE)
families = [
    RuleFamily("consecutive", "consecutive", {"k": list(range(1, 9))}, {"cooldown_ms": 6 * HOUR}),
    RuleFamily("m_of_6", "mofn", {"m": list(range(1, 7)), "n": [6]}, {"cooldown_ms": 6 * HOUR}),
    RuleFamily("count_in_4h", "count_in_window", {"m": list(range(1, 9)), "window_ms": [4 * HOUR]},
               {"cooldown_ms": 6 * HOUR}),
]
res = sweep_rules(families, ds, schedule, truth_level="notification")

# precision climbs and recall falls as the rules get stricter
for p in res.points:
    prec = "  n/a " if p.precision is None else "%.3f" % p.precision
    print("%-12s %-22s prec %s  recall %.3f  notes %d" % (p.family, p.params, prec, p.recall, p.n_notifications))

for name, area in sorted(res.auprc.items(), key=lambda kv: -kv[1]):
    print("AUPRC %-12s %.3f" % (name, area))

# per family, the Pareto front holds the settings nothing else beats on both axes
for name, idx in sorted(res.pareto.items()):
    print("pareto %-12s" % name, [res.points[i].params for i in idx])

if __name__ == "__main__":
    import matplotlib.pyplot as plt

    for fam in families:
        pts = [p for p in res.points if p.family == fam.name and p.precision is not None]
        plt.plot([p.recall for p in pts], [p.precision for p in pts], marker="o", label=fam.name)
    plt.xlabel("episode recall")
    plt.ylabel("notification precision")
    plt.legend()
    plt.show()
