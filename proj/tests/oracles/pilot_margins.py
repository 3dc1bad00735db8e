"""Pilot run that fixes the collapse-ablation margins used by the acceptance binary.

Runs the fig2_collapse scenario through the CLI on a master seed disjoint from
the acceptance seed and records, for each ablation, how far its median final
max_abs_cosine sits above the semi-gradient + optimal-predictor baseline.
Run from the repository root after building:
    python3 tests/oracles/pilot_margins.py [path/to/spl]
"""

import json
import pathlib
import subprocess
import sys
import tempfile

ROOT = pathlib.Path(__file__).resolve().parents[2]
OUT = ROOT / "tests" / "data" / "pilot_margins.json"
SEED = 1000
RUNS = 100


def final_median(summary_path):
    with open(summary_path) as fh:
        return json.load(fh)["median_curve"]["max_abs_cosine"][-1]


def main():
    spl = sys.argv[1] if len(sys.argv) > 1 else str(ROOT / "build" / "spl")
    with tempfile.TemporaryDirectory() as tmp:
        subprocess.run([spl, "run", "--scenario", "fig2_collapse", "--seed", str(SEED),
                        "--runs", str(RUNS), "--out", tmp], check=True, stdout=subprocess.DEVNULL)
        med = {v: final_median(pathlib.Path(tmp) / f"fig2_collapse.{v}.summary.json")
               for v in ("semi_optimal", "full_optimal", "semi_noisy")}
    record = {
        "master_seed": SEED,
        "n_runs": RUNS,
        "median_final_max_abs_cosine": med,
        "margin_full_optimal": med["full_optimal"] - med["semi_optimal"],
        "margin_semi_noisy": med["semi_noisy"] - med["semi_optimal"],
    }
    OUT.write_text(json.dumps(record, indent=2) + "\n")
    print(json.dumps(record, indent=2))


if __name__ == "__main__":
    main()
