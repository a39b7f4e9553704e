"""How often do the skip-sequence trend and the >=99% baseline hold across seeds?

    python scripts/seed_sweep.py --seeds 50
"""
import argparse

from pdla.harness import ExperimentConfig, run_experiment2


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--seeds", type=int, default=20)
    ap.add_argument("--jitter", type=int, default=3)
    args = ap.parse_args()
    ordered = baseline = 0
    for seed in range(args.seeds):
        report, _ = run_experiment2(ExperimentConfig(experiment=2, seed=seed, synth_jitter=args.jitter), write=False)
        acc = dict(report.rows)
        ordered += acc[1] > acc[5] >= acc[10]
        baseline += acc[1] >= 99.0
        print(seed, " ".join(f"{a:8.4f}" for _, a in report.rows))
    print(f"ordering 1 > 5 >= 10 held on {ordered}/{args.seeds} seeds; SKS=1 >= 99% on {baseline}/{args.seeds}")


if __name__ == "__main__":
    main()
