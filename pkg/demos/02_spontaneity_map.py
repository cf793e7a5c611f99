"""Visualize the conditional spontaneity map.

For each base naturalness level, sweep the mean quality metric and show
how the score scales linearly into the level's band - until the audio is
hyper-clean (every metric above 3.5), where levels below the top get
squeezed into a narrow punitive band instead: suspiciously clean audio is
treated as incongruent with a spontaneous style.
"""

import numpy as np

from exprscore import QualityMetrics, SpontaneityConfig, score_spontaneity

levels = (1, 3, 5, 7, 9)
ms = np.linspace(1.0, 5.0, 17)

header = "M_avg " + "".join(f"  L={level:<5}" for level in levels)
print(header)
print("-" * len(header))
for m in ms:
    q = QualityMetrics(m, m, m, m)
    row = f"{m:5.2f} "
    for level in levels:
        score = score_spontaneity(q, SpontaneityConfig(level))
        marker = "*" if m > 3.5 and level < 9 else " "
        row += f" {score:6.1f}{marker}"
    print(row)
print("\n* = hyper-clean penalty branch (uniform metrics above 3.5)")

try:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(7, 4))
    fine = np.linspace(1.0, 5.0, 400)
    for level in levels:
        cfg = SpontaneityConfig(level)
        ys = [score_spontaneity(QualityMetrics(m, m, m, m), cfg) for m in fine]
        ax.plot(fine, ys, label=f"base level {level}")
    ax.axvline(3.5, color="gray", linestyle=":", label="hyper-clean threshold")
    ax.set_xlabel("mean quality metric")
    ax.set_ylabel("spontaneity score (0-100)")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig("spontaneity_map.png", dpi=120)
    print("wrote spontaneity_map.png")
except ImportError:
    pass
