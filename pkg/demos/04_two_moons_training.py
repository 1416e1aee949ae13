"""Training a small network on two_moons at half the extra cost.

The scheduled optimizer with constant(a_c=0.5) pays for roughly 1.5
propagations per step instead of the full 2 of an always-on
two-propagation method, and on this task it still generalizes at least
as well as plain descent. The script trains both, reports held-out
error and measured cost, and draws the learned decision regions.

Run:  python3 demos/04_two_moons_training.py
"""

import os

import numpy as np

from schedsam import (
    LrSchedule,
    MlpObjective,
    OptimizerConfig,
    evaluate,
    make_dataset,
    parse_schedule,
    sharpness_report,
    ss_sam_run,
)

OUT_DIR = os.path.join(os.path.dirname(__file__), "output")
SEEDS = (1, 2, 3, 4, 5)


def train(obj, schedule_text: str, test_data) -> dict:
    errors, etas, finals = [], [], []
    for seed in SEEDS:
        config = OptimizerConfig(
            rho=0.2,
            lr_schedule=LrSchedule("constant", 0.2),
            total_steps=2000,
            seed=seed,
            batch_size=64,
        )
        report = ss_sam_run(obj, config, parse_schedule(schedule_text))
        errors.append(evaluate(obj, report.final_theta, test_data))
        etas.append(report.empirical_eta)
        finals.append(report.final_theta)
    return {
        "error": float(np.mean(errors)),
        "eta": float(np.mean(etas)),
        "theta": finals[0],
    }


def main() -> None:
    os.makedirs(OUT_DIR, exist_ok=True)
    train_data = make_dataset("two_moons", 400, noise=0.2, seed=0)
    test_data = make_dataset("two_moons", 400, noise=0.2, seed=1)
    obj = MlpObjective([2, 16, 16, 2], train_data, activation="relu")

    print("== two_moons, MLP [2, 16, 16, 2], 2000 steps, 5 seeds ==")
    scheduled = train(obj, "constant(a_c=0.5)", test_data)
    plain = train(obj, "constant(a_c=0)", test_data)
    print(f"{'method':<22}  {'test error':>10}  {'cost/step':>9}")
    print(f"{'scheduled, p = 0.5':<22}  {scheduled['error']:>10.4f}  {scheduled['eta']:>9.4f}")
    print(f"{'plain descent':<22}  {plain['error']:>10.4f}  {plain['eta']:>9.4f}")

    print()
    print("== endpoint flatness (seed 1) ==")
    for name, result in (("scheduled", scheduled), ("plain", plain)):
        report = sharpness_report(obj, result["theta"], rho=0.2)
        print(
            f"{name:<10} neighborhood loss rise {report.proxy_gap:.4f}, "
            f"top curvature {report.top_eigenvalue:.2f}"
        )
    print("(the loss rise is the quantity the two-propagation step descends;")
    print(" the single top curvature direction can order differently)")

    try:
        import matplotlib

        matplotlib.use("Agg")
        import matplotlib.pyplot as plt
    except ImportError:
        print("\nmatplotlib not installed, skipping the figure")
        return

    xs = np.linspace(-1.8, 2.8, 220)
    ys = np.linspace(-1.3, 1.8, 220)
    grid = np.array([[x, y] for y in ys for x in xs])
    fig, axes = plt.subplots(1, 2, figsize=(10, 4), sharex=True, sharey=True)
    for ax, (name, result) in zip(axes, (("scheduled, p = 0.5", scheduled), ("plain descent", plain))):
        labels = obj.predict(result["theta"], grid).reshape(len(ys), len(xs))
        ax.contourf(xs, ys, labels, levels=[-0.5, 0.5, 1.5], colors=["#aec7e8", "#ffbb78"], alpha=0.7)
        for k, color in ((0, "tab:blue"), (1, "tab:orange")):
            mask = test_data.labels == k
            ax.scatter(test_data.inputs[mask, 0], test_data.inputs[mask, 1], s=6, color=color)
        ax.set_title(name)
    fig.suptitle("decision regions on held-out points")
    fig.tight_layout()
    path = os.path.join(OUT_DIR, "two_moons_boundaries.png")
    fig.savefig(path, dpi=120)
    print(f"\nwrote {path}")


if __name__ == "__main__":
    main()
