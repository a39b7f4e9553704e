"""Run the three experiments from configs/ and print their tables.

    python scripts/reproduce_all.py [--out runs] [--svg]
"""
import argparse
from pathlib import Path

from pdla.harness import load_config, run

ROOT = Path(__file__).resolve().parent.parent


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", default="runs")
    ap.add_argument("--svg", action="store_true")
    args = ap.parse_args()
    for n in (1, 2, 3):
        cfg = load_config(ROOT / "configs" / f"exp{n}.cfg", out=args.out, svg=args.svg or None)
        result = run(cfg)
        print(f"== experiment {n} ==")
        print(result.text() if n == 1 else result[0].table())


if __name__ == "__main__":
    main()
