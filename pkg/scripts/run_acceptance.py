#!/usr/bin/env python3
"""Run the acceptance suite and print only its PASS/FAIL lines.

Exit status is pytest's: 0 when every criterion passes.
"""
import subprocess
import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent


def main() -> int:
    proc = subprocess.run(
        [sys.executable, "-m", "pytest", str(ROOT / "tests" / "test_acceptance.py"), "-q", "-p", "no:cacheprovider"],
        capture_output=True,
        text=True,
        cwd=ROOT,
    )
    lines = [ln for ln in proc.stdout.splitlines() if ln.startswith("ACCEPTANCE")]
    print("\n".join(lines) if lines else proc.stdout)
    passed = sum(ln.endswith("PASS") for ln in lines)
    print(f"{passed}/{len(lines)} criteria pass")
    return proc.returncode


if __name__ == "__main__":
    sys.exit(main())
