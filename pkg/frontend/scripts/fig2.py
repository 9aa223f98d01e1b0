#!/usr/bin/env python3
"""Render fig2 from stiraplab CSV output: fig2.py INPUT... OUTPUT.png"""
import sys

from stirapfigs import run_script

if __name__ == "__main__":
    raise SystemExit(run_script("fig2", sys.argv[1:]))
