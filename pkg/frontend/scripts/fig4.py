#!/usr/bin/env python3
"""Render fig4 from stiraplab CSV output: fig4.py INPUT... OUTPUT.png"""
import sys

from stirapfigs import run_script

if __name__ == "__main__":
    raise SystemExit(run_script("fig4", sys.argv[1:]))
