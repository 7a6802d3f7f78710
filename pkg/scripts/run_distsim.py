"""
Run the LOCAL-model simulation on a graph file.

Usage:
    python scripts/run_distsim.py graph.el --stage-cap 200 --trace trace.jsonl

Exit code 4 means the stage cap was reached with edges still uncolored.
"""

import sys
from pathlib import Path

# Ensure project root is on the path
sys.path.insert(0, str(Path(__file__).parent.parent))

from api.cli import app

if __name__ == "__main__":
    app(args=["distsim", *sys.argv[1:]])
