#!/usr/bin/env python3
"""Regenerate the committed golden reports.

Writes the three canonical configurations to reports/golden/ with timing
fields stripped, so reruns on the same code produce byte-identical files.
"""
import pathlib
import sys

sys.path.insert(0, str(pathlib.Path(__file__).resolve().parent.parent / "src"))

from lcqft import serialize
from lcqft.suites import GOLDEN_CONFIGS, RunConfig, run_suite


def main():
    out_dir = pathlib.Path(__file__).resolve().parent.parent / "reports" / "golden"
    out_dir.mkdir(parents=True, exist_ok=True)
    for name, kwargs in GOLDEN_CONFIGS:
        report = run_suite(RunConfig(**kwargs))
        path = out_dir / f"{name}.json"
        path.write_text(serialize.dumps(serialize.strip_timings(report)) + "\n")
        print(f"wrote {path} ({report['status']})")


if __name__ == "__main__":
    main()
