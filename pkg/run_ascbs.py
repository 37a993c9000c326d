"""
Command-line entry point for the ASCBS solver.

Examples:
    python run_ascbs.py solve --map data/empty-8-8.map --scen data/empty-8-8-random-1.scen --streams 4 --cycle 2
    python run_ascbs.py validate --instance data/three_streams_instance.json --solution data/three_streams_solution.json
"""

import sys

from ascbs.cli import main


if __name__ == "__main__":
    sys.exit(main())
