"""The command-line workflow, end to end.

A config file describes one experiment: objective, optimizer, schedule,
seeds. `schedsam run` executes it and writes per-seed reports, traces,
plot data, and an aggregate summary; `eta-table`, `plot-schedule`, and
`sharpness` operate on those files. This script drives each subcommand
in process and shows what lands on disk.

Run:  python3 demos/05_cli_tour.py
"""

import json
import os
import tempfile

from schedsam.cli import main as cli

CONFIG = """\
[experiment]
name = tour
seeds = 1, 2, 3
output_dir = {out}

[objective]
kind = dataset
generator = two_moons
size = 200
noise = 0.2
layers = 2, 12, 2

[optimizer]
lr = 0.2
rho = 0.1
epochs = 8
batch_size = 32

[schedule]
p = trig(sin1)
"""


def banner(title: str) -> None:
    print()
    print("#" * 60)
    print("#", title)
    print("#" * 60)


def main() -> None:
    workdir = tempfile.mkdtemp(prefix="schedsam_tour_")
    out = os.path.join(workdir, "out")
    config_path = os.path.join(workdir, "tour.ini")
    with open(config_path, "w") as fh:
        fh.write(CONFIG.format(out=out))

    banner(f"schedsam run {config_path}")
    code = cli(["run", config_path])
    print(f"(exit code {code})")

    banner("files written")
    for name in sorted(os.listdir(out)):
        size = os.path.getsize(os.path.join(out, name))
        print(f"  {name:<28} {size:>6} bytes")

    banner("aggregate.json, summary fields")
    with open(os.path.join(out, "aggregate.json")) as fh:
        aggregate = json.load(fh)
    for key in ("schedule", "expected_eta", "seeds", "failed_seeds"):
        print(f"  {key}: {aggregate[key]}")
    print(f"  mean: {aggregate['mean']}")

    banner("schedsam eta-table (a small sweep file)")
    sweep = os.path.join(workdir, "sweep.txt")
    with open(sweep, "w") as fh:
        fh.write("constant(a_c=0.5)\ntrig(sin1)\ntrig(cos2)\nlinear(mid=0.6)\n")
    cli(["eta-table", sweep, "--steps", "10000", "--out", out])

    banner("schedsam plot-schedule on seed_1.json")
    cli(["plot-schedule", os.path.join(out, "seed_1.json")])
    plot_path = os.path.join(out, "seed_1_schedule.csv")
    with open(plot_path) as fh:
        lines = fh.read().splitlines()
    print(f"first rows of {os.path.basename(plot_path)}:")
    for line in lines[:4]:
        print(f"  {line}")

    banner("schedsam sharpness on seed_1.json")
    cli(["sharpness", os.path.join(out, "seed_1.json"), "--out", out])

    print()
    print(f"everything is under {workdir}")


if __name__ == "__main__":
    main()
