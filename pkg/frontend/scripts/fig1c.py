#!/usr/bin/env python3
"""Render fig1c from stiraplab CSV output: fig1c.py INPUT... OUTPUT.png"""
import sys

from stirapfigs import run_script

if __name__ == "__main__":
    raise SystemExit(run_script("fig1c", sys.argv[1:]))
