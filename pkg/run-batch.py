#!/usr/bin/env python3
"""
Batch execution of the reference computations over the shipped fixtures.

Each entry runs one ``hecke-pm`` command in a subprocess and checks its exit code;
with ``--trace console`` or ``--trace otlp`` every run also emits its spans.

Usage:
    python run-batch.py [--trace otlp]
"""

import asyncio
import sys
from dataclasses import dataclass
from datetime import datetime
from pathlib import Path

ROOT = Path(__file__).resolve().parent
FIXTURES = ROOT / "fixtures"


@dataclass(frozen=True)
class BatchRun:
    name: str
    argv: tuple[str, ...]
    expected_exit: int = 0
    markers: tuple[str, ...] = ()


RUNS = [
    BatchRun("sturm bound, level 52", ("sturm", "52", "2", "--g0"), markers=("bound:",)),
    BatchRun(
        "weak eigenforms of S_2(Gamma_0(52)) mod 9",
        ("classify", str(FIXTURES / "S_2_G0_52.basis"), "--p", "3", "--m", "2"),
        markers=("systems:", "forms:"),
    ),
    BatchRun(
        "weak eigenforms of S_2(Gamma_0(26)) mod 9",
        ("classify", str(FIXTURES / "S_2_G0_26.basis"), "--p", "3", "--m", "2"),
        markers=("systems:", "forms:"),
    ),
    BatchRun(
        "half sum of f and g~ mod 9",
        ("halfsum", str(FIXTURES / "S_2_G0_52.basis"), "--f", "f", "--g", "gt", "--p", "3"),
        markers=("h:", "verified:", "matches:"),
    ),
    BatchRun("E_4 and E~ mod 25", ("eisenstein", "--p", "5", "--m", "2", "--bound", "30"), markers=("power-congruent-to-one:",)),
    BatchRun(
        "planted level stripping mod 25",
        ("roundtrip", str(FIXTURES / "S_2_G0_26.basis"), "--p", "5", "--m", "2", "--count", "5"),
        markers=("recovered:",),
    ),
    BatchRun("obstruction, eta of order 3 mod 9", ("obstruct", "--level", "63", "--p", "3", "--m", "2", "--char", "9:2"), markers=("verdict:",)),
]


async def run_command(argv: tuple[str, ...], trace: str) -> tuple[int, str]:
    """Run one hecke-pm command and return its exit code and combined output"""
    try:
        proc = await asyncio.create_subprocess_exec(
            sys.executable, "-m", "hecke_pm", "--trace", trace, *argv,
            stdout=asyncio.subprocess.PIPE,
            stderr=asyncio.subprocess.PIPE,
            cwd=ROOT,
        )
        stdout, stderr = await proc.communicate()
        return proc.returncode, stdout.decode() + stderr.decode()
    except OSError as e:
        return -1, str(e)


async def run_batch(runs: list[BatchRun], trace: str = "none") -> list[tuple[BatchRun, bool]]:
    print("┌─────────────────────────────────────────────────────────────┐")
    print("│  Reference computations                                     │")
    print("└─────────────────────────────────────────────────────────────┘")
    print()

    results = []
    total = len(runs)
    for idx, run in enumerate(runs, 1):
        print(f"[{idx}/{total}] {run.name}...")
        code, output = await run_command(run.argv, trace)
        success = code == run.expected_exit
        results.append((run, success))

        for line in output.split("\n"):
            if any(line.startswith(marker) for marker in run.markers):
                print(f"   {line.strip()}")

        if success:
            print(f"   ✅ exit {code}\n")
        else:
            print(f"   ⚠️  exit {code}, expected {run.expected_exit}\n")
    return results


async def main(argv: list[str]) -> int:
    trace = argv[argv.index("--trace") + 1] if "--trace" in argv else "none"
    start_time = datetime.now()

    print("=" * 64)
    print("  hecke-pm batch run")
    print("=" * 64)
    print()

    results = await run_batch(RUNS, trace)

    duration = (datetime.now() - start_time).total_seconds()
    passed = sum(1 for _, ok in results if ok)
    print("=" * 64)
    print(f"  {passed}/{len(results)} runs as expected in {duration:.1f} seconds")
    print("=" * 64)
    for run, ok in results:
        if not ok:
            print(f"   - failed: {run.name}")
    return 0 if passed == len(results) else 1


if __name__ == "__main__":
    sys.exit(asyncio.run(main(sys.argv[1:])))
