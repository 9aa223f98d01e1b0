#!/usr/bin/env python3
"""Render fig1b from stiraplab CSV output: fig1b.py INPUT... OUTPUT.png"""
import sys

from stirapfigs import run_script

if __name__ == "__main__":
    raise SystemExit(run_script("fig1b", sys.argv[1:]))
