"""
sparse_iscra - Main Entry Point

Checks the runtime dependencies, then hands the command line to the core
orchestrator (sparse_iscra.core.run_tool).

Features:
    - Required library check (numpy, scipy) with an install hint
    - Optional library check (colorama, prettytable, tabulate, tqdm); the
      tool degrades to plain output without them
    - Clean error handling and exit codes

Dependencies:
    Required:
        - numpy: dense linear algebra
        - scipy: factorizations, conjugate gradients, null spaces, filters

    Optional:
        - colorama: colored terminal output
        - prettytable: Metric/Value summary tables
        - tabulate: grid tables for verify and sweep means
        - tqdm: sweep progress bars

Usage:
    python3 run.py solve --preset exam41 --e 0.05 --solver iscra --lambda 0.1 --rho 0.8
    python3 run.py solve --preset exam51 --m 400 --seed 7 --clambda 10
    python3 run.py sweep --protocol compare-exam54-m400 --workers 4
    python3 run.py diagnose --preset exam31 --lambda 0.1
    python3 run.py verify

Exit Conditions:
    - 0: command succeeded (verify: no check failed)
    - 1: command failed or a required library is missing
    - 2: invalid command line
"""

import sys
from pathlib import Path

ROOT_DIR = Path(__file__).resolve().parent
sys.path.insert(0, str(ROOT_DIR))

required_libraries = ['numpy', 'scipy']

optional_libraries = [
    'colorama',
    'prettytable',
    'tabulate',
    'tqdm'
]


def missing_libraries(names: list) -> list:
    """
    Return the names from the list that cannot be imported.

    Example:
        missing_libraries(['numpy', 'not_a_module'])   # -> ['not_a_module']
    """
    missing = []
    for name in names:
        try:
            __import__(name)
        except ImportError:
            missing.append(name)
    return missing


def main() -> int:
    """
    Check dependencies and run the requested subcommand.

    Returns:
        int: Process exit code
    """
    missing = missing_libraries(required_libraries)
    if missing:
        print(f"✘ Missing required libraries: {', '.join(missing)}")
        print("💡 Install them with: pip install -r requirements.txt")
        return 1

    optional = missing_libraries(optional_libraries)
    if optional:
        print(f"⚠ Optional libraries not installed (plain output used): {', '.join(optional)}")

    try:
        from sparse_iscra.core import run_tool
        return run_tool()
    except KeyboardInterrupt:
        print("\n✘ Interrupted.")
        return 1


if __name__ == "__main__":
    sys.exit(main())
