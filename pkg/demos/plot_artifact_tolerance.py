"""
How much motion artifact can a detector take?
=============================================

Build two detectors that agree on clean signal but degrade at different
rates, draw their artifact tolerance curves and compare the summaries.
"""

from cmeval import atc
from cmeval.artifact_tolerance import summarize
from cmeval.synthgen import ArtifactProcess, DetectorModel, SynthConfig, gen_cohort
from cmeval.timeline import SECOND

# one long recording of 20 000 thirty-second segments, quality uniform on [0, 1]
base = dict(seed=1, n_subjects=1, horizon=20_000 * 30 * SECOND, attributes={},
            artifacts=ArtifactProcess("uniform"))
robust = gen_cohort(SynthConfig(detector=DetectorModel(0.95, 0.1, 0.15), **base)).dataset
fragile = gen_cohort(SynthConfig(detector=DetectorModel(0.95, 0.5, 0.15), **base)).dataset

# accuracy per quality decile; quality is 1 minus the artifact fraction
curves = {"robust": atc(robust), "fragile": atc(fragile)}
for name, pts in curves.items():
    print(name, " ".join("%.2f:%.3f" % (p.quality, p.metric_value) for p in pts))

# slope of the fall-off, the largest artifact coverage that keeps accuracy
# at 0.85, and the mean height of the curve
for name, pts in curves.items():
    s = summarize(pts, perf_min=0.85)
    print("%-8s slope %.3f  max coverage %s  auatc %.3f" % (
        name, s.slope_magnitude, "n/a" if s.max_coverage is None else "%.2f" % s.max_coverage, s.auatc))

# the same curve for sensitivity instead of accuracy
print("fragile sensitivity", ["%.3f" % p.metric_value for p in atc(fragile, metric="sensitivity")])

if __name__ == "__main__":
    import matplotlib.pyplot as plt

    for name, pts in curves.items():
        plt.plot([p.quality for p in pts], [p.metric_value for p in pts], marker="o", label=name)
    plt.axhline(0.85, color="0.6", ls="--")
    plt.xlabel("signal quality")
    plt.ylabel("accuracy")
    plt.legend()
    plt.show()
