#!/usr/bin/env python3
"""Render fig3a from stiraplab CSV output: fig3a.py INPUT... OUTPUT.png"""
import sys

from stirapfigs import run_script

if __name__ == "__main__":
    raise SystemExit(run_script("fig3a", sys.argv[1:]))
