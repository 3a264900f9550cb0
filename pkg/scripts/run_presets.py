#!/usr/bin/env python3

import os
import sys
import argparse

# Add the parent directory to the path so we can import our modules
sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

import config
from app.cli import parse_and_dispatch


def load_presets(only=None):
    """List (subcommand, name, path) for every preset in data/presets.

    Preset files are named ``<subcommand>__<name>.json``.
    """
    presets = []
    if not os.path.exists(config.PRESETS_DIR):
        print(f"Error: {config.PRESETS_DIR} directory not found")
        return []

    for filename in sorted(os.listdir(config.PRESETS_DIR)):
        if not filename.endswith('.json') or '__' not in filename:
            continue
        subcommand, name = filename[:-5].split('__', 1)
        if only and subcommand not in only:
            continue
        presets.append((subcommand, name, os.path.join(config.PRESETS_DIR, filename)))
    return presets


def main():
    parser = argparse.ArgumentParser(description="Run every bundled preset")
    parser.add_argument("--only", nargs="*", help="Restrict to these subcommands")
    parser.add_argument("--output-dir", default=config.OUTPUT_DIR)
    parser.add_argument("--threads", type=int, default=config.DEFAULT_THREADS)
    args = parser.parse_args()

    failures = 0
    for subcommand, name, path in load_presets(args.only):
        out = os.path.join(args.output_dir, f"{subcommand}__{name}")
        print(f"Running {subcommand} preset '{name}' -> {out}")
        code = parse_and_dispatch([subcommand, "--config", path, "--output-dir", out,
                                   "--threads", str(args.threads), "--quiet"])
        if code != 0:
            print(f"❌ {name} exited with {code}")
            failures += 1
        else:
            print(f"✅ {name}")

    print(f"\n{failures} preset(s) failed")
    sys.exit(1 if failures else 0)


if __name__ == "__main__":
    main()
