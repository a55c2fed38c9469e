#!/usr/bin/env python3
"""
Bootstrap a checkout: install the stack, write a default .env, run a smoke check.

    python setup.py             # everything
    python setup.py --no-install
"""

import argparse
import io
import os
import subprocess
import sys

# Written to .env in this order; keys mirror the attributes read by config.Config.
ENV_DEFAULTS = [
    ('Reduction', [('TDL_ITERATION_CAP', '1000000')]),
    ('Special-set search (free model vertices)', [('TDL_SEARCH_CAP', '20')]),
    ('Shared cap override; --cap wins over it', [('# TDL_CAP', '')]),
    ('Rank', [('TDL_RR_SHORTCUT', 'false')]),
    ('Logging', [('TDL_LOG_LEVEL', 'INFO'), ('TDL_LOG_FILE', '')]),
    ('Progress bars for long searches', [('TDL_PROGRESS', 'false')]),
]

SMOKE_COMMAND = ['dhar', '--input', os.path.join('fixtures', 'fig2.json'), '--divisor', 'D2', '--base', 'v0']
SMOKE_EXPECTED = 'S = {v1, v2, w4}'


def render_env() -> str:
    blocks = []
    for title, entries in ENV_DEFAULTS:
        lines = [f"# {title}"] + [f"{key}={value}" for key, value in entries]
        blocks.append('\n'.join(lines))
    return '\n\n'.join(blocks) + '\n'


def install_requirements() -> bool:
    print("Installing required packages...")
    try:
        subprocess.check_call([sys.executable, "-m", "pip", "install", "-r", "requirements.txt"])
    except subprocess.CalledProcessError as e:
        print(f"✗ pip failed: {e}")
        return False
    print("✓ Requirements installed")
    return True


def write_env(path: str = '.env') -> None:
    if os.path.exists(path):
        print(f"✓ {path} kept as is")
        return
    with open(path, 'w', encoding='utf-8') as handle:
        handle.write(render_env())
    print(f"✓ Wrote default settings to {path}")


def smoke_check() -> bool:
    """Import the stack and run one command on the bundled worked example."""
    try:
        import hypothesis  # noqa: F401
        import networkx  # noqa: F401
        import tqdm  # noqa: F401
        from config import Config
        from main import run_command
    except ImportError as e:
        print(f"✗ Missing package: {e}")
        return False

    try:
        caps = (Config.iteration_cap(), Config.search_cap())
    except Exception as e:
        print(f"✗ Settings in .env are invalid: {e}")
        return False
    print(f"✓ Caps: {caps[0]} iterations, {caps[1]} free vertices")

    out = io.StringIO()
    code = run_command(SMOKE_COMMAND, out=out)
    last = out.getvalue().strip().splitlines()[-1:] or ['']
    if code != 0 or last[0] != SMOKE_EXPECTED:
        print(f"✗ Smoke command exited {code} with {last[0]!r}")
        return False
    print(f"✓ {SMOKE_COMMAND[0]} on fig2 gives {SMOKE_EXPECTED}")
    return True


def main():
    parser = argparse.ArgumentParser(description="Set up the metric-graph divisor toolkit")
    parser.add_argument('--no-install', action='store_true', help='Skip pip; only write .env and check')
    args = parser.parse_args()

    if not args.no_install and not install_requirements():
        sys.exit(1)
    write_env()
    if not smoke_check():
        print("Setup finished with errors; see above.")
        sys.exit(1)

    print("\nReady. Try:")
    print(f"  python main.py {' '.join(SMOKE_COMMAND)}")
    print("  pytest -m 'not slow'")


if __name__ == "__main__":
    main()
