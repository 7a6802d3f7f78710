"""
Color a graph file.

Usage:
    python scripts/run_color.py graph.el --alg msva --seed 7 --out graph.col
"""

import sys
from pathlib import Path

# Ensure project root is on the path
sys.path.insert(0, str(Path(__file__).parent.parent))

from api.cli import app

if __name__ == "__main__":
    app(args=["color", *sys.argv[1:]])
