"""A tour of the trial-probability schedule families.

Every update step flips a coin: heads runs the two-propagation
neighborhood step, tails runs a plain gradient step. The coin's bias
p(t) comes from a schedule, and the expected propagation cost per step
is eta = 1 + mean(p). This script builds one schedule from each family,
samples its curve, and prints the expected-cost table for the bundled
registry of published values, flagging the rows where the published
number disagrees with the arithmetic.

Run:  python3 demos/01_schedule_zoo.py
"""

import os

import numpy as np

from schedsam import eta_table, load_published_eta, parse_schedule

OUT_DIR = os.path.join(os.path.dirname(__file__), "output")

SHOWCASE = [
    "constant(a_c=0.5)",
    "piecewise(a_p=0,b_p=0.3)",
    "piecewise(a_p=1,b_p=0.7)",
    "linear(mid=0.25)",
    "trig(cos2)",
    "trig(sin1)",
]

TOTAL = 1000


def main() -> None:
    os.makedirs(OUT_DIR, exist_ok=True)

    print("== probability curves (T = %d) ==" % TOTAL)
    landmarks = [0, TOTAL // 4, TOTAL // 2, 3 * TOTAL // 4, TOTAL - 1]
    header = "schedule".ljust(26) + "".join(f"t={t:<8}" for t in landmarks)
    print(header)
    curves = {}
    for text in SHOWCASE:
        schedule = parse_schedule(text)
        probs = schedule.probabilities(TOTAL)
        curves[text] = probs
        row = text.ljust(26) + "".join(f"{probs[t]:<10.3f}" for t in landmarks)
        print(row)

    print()
    print("== expected-cost table vs the bundled registry (T = 10^4) ==")
    registry = load_published_eta()
    rows = eta_table([parse_schedule(s) for s in registry], 10000)
    flagged = [r for r in rows if r.erratum]
    agree = sum(1 for r in rows if not r.erratum and abs(r.exact - r.published) <= 0.01)
    print(f"{len(rows)} rows, {agree} agree with print to 0.01, {len(flagged)} flagged misprints:")
    for r in flagged:
        print(f"  {r.schedule:<26} printed {r.published:.2f}, analytic {r.exact:.5f}")

    try:
        import matplotlib

        matplotlib.use("Agg")
        import matplotlib.pyplot as plt
    except ImportError:
        print("\nmatplotlib not installed, skipping the figure")
        return

    fig, ax = plt.subplots(figsize=(8, 4.5))
    t = np.arange(TOTAL)
    for text, probs in curves.items():
        ax.plot(t, probs, label=text, linewidth=1.5)
    ax.set_xlabel("step t")
    ax.set_ylabel("trial probability p(t)")
    ax.set_title("schedule families over one horizon")
    ax.legend(fontsize=8, loc="center right")
    ax.set_ylim(-0.05, 1.05)
    fig.tight_layout()
    path = os.path.join(OUT_DIR, "schedule_zoo.png")
    fig.savefig(path, dpi=120)
    print(f"\nwrote {path}")


if __name__ == "__main__":
    main()
