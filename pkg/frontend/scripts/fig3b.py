#!/usr/bin/env python3
"""Render fig3b from stiraplab CSV output: fig3b.py INPUT... OUTPUT.png"""
import sys

from stirapfigs import run_script

if __name__ == "__main__":
    raise SystemExit(run_script("fig3b", sys.argv[1:]))
