"""
Logging utilities for the ASCBS solver.
Provides leveled diagnostics on standard error and structured event records for solver runs.
"""

import os
import sys
import json
import logging
from datetime import datetime
from typing import Dict, Any, List, Optional

from dotenv import load_dotenv


LOG_LEVELS = {
    "error": logging.ERROR,
    "info": logging.INFO,
    "debug": logging.DEBUG,
}

DEFAULT_LOG_LEVEL = "error"


class SolverLogger:
    """Logger for solver runs and search statistics"""

    def __init__(self, log_level: int = logging.ERROR):
        """
        Initialize the logger.

        Args:
            log_level: Logging level (from the logging module)
        """
        self.logger = logging.getLogger("ascbs")
        self.logger.setLevel(log_level)
        self.logger.propagate = False

        # Clear any existing handlers to avoid duplicates
        if self.logger.hasHandlers():
            self.logger.handlers.clear()

        # Diagnostics never go to stdout, which carries command results
        console_handler = logging.StreamHandler(sys.stderr)
        formatter = logging.Formatter('%(asctime)s - %(name)s - %(levelname)s - %(message)s')
        console_handler.setFormatter(formatter)
        self.logger.addHandler(console_handler)

        # Store solver events for later saving
        self.run_id: Optional[str] = None
        self.events: List[Dict[str, Any]] = []

    def set_level(self, log_level: int) -> None:
        self.logger.setLevel(log_level)

    def debug(self, msg: str, *args: Any) -> None:
        self.logger.debug(msg, *args)

    def info(self, msg: str, *args: Any) -> None:
        self.logger.info(msg, *args)

    def warning(self, msg: str, *args: Any) -> None:
        self.logger.warning(msg, *args)

    def error(self, msg: str, *args: Any) -> None:
        self.logger.error(msg, *args)

    def config_warning(self, msg: str) -> None:
        """Emit a configuration warning whatever the current level."""
        record = self.logger.makeRecord(self.logger.name, logging.WARNING, __file__, 0, msg, (), None)
        self.logger.handle(record)

    def start_solve(self, run_id: str, config: Dict[str, Any]) -> None:
        """
        Log the start of a solver run.

        Args:
            run_id: Identifier for the run (variant name and instance summary)
            config: Solver configuration
        """
        self.run_id = run_id
        self.events = []

        event = {
            "type": "solve_start",
            "timestamp": datetime.now().isoformat(),
            "run_id": run_id,
            "config": config,
        }
        self.events.append(event)
        self.logger.info(f"Solve {run_id} started with config: {json.dumps(config)}")

    def log_expansion(self, cost: int, n_conflicts: int, depth: int, chosen: Optional[str]) -> None:
        """
        Log the expansion of a constraint-tree node.

        Only recorded at debug level; a sweep expands too many nodes to keep them otherwise.
        """
        if not self.logger.isEnabledFor(logging.DEBUG):
            return
        event = {
            "type": "ct_expand",
            "timestamp": datetime.now().isoformat(),
            "run_id": self.run_id,
            "cost": cost,
            "conflicts": n_conflicts,
            "depth": depth,
            "conflict": chosen,
        }
        self.events.append(event)
        self.logger.debug(f"Expand cost={cost} conflicts={n_conflicts} depth={depth} split={chosen}")

    def end_solve(self, outcome: str, stats: Dict[str, Any]) -> None:
        """
        Log the end of a solver run.

        Args:
            outcome: solved, unsolvable or timeout
            stats: Final counters (soc, node counts, elapsed time)
        """
        event = {
            "type": "solve_end",
            "timestamp": datetime.now().isoformat(),
            "run_id": self.run_id,
            "outcome": outcome,
            "stats": stats,
        }
        self.events.append(event)
        self.logger.info(f"Solve {self.run_id} ended: {outcome} {json.dumps(stats)}")

    def save_events(self, path: str) -> None:
        """Save the recorded events of the last run to a JSON file"""
        directory = os.path.dirname(path)
        if directory:
            os.makedirs(directory, exist_ok=True)

        with open(path, 'w') as f:
            json.dump(self.events, f, indent=2)

        self.logger.info(f"Solver event log saved to {path}")


def level_from_env() -> int:
    """Read ASCBS_LOG (from the environment or a .env file) and map it to a logging level."""
    load_dotenv()
    name = os.getenv("ASCBS_LOG", DEFAULT_LOG_LEVEL).strip().lower()
    if name not in LOG_LEVELS:
        solver_logger.config_warning(f"Unknown ASCBS_LOG value '{name}', using '{DEFAULT_LOG_LEVEL}'")
        name = DEFAULT_LOG_LEVEL
    return LOG_LEVELS[name]


def configure_from_env() -> SolverLogger:
    solver_logger.set_level(level_from_env())
    return solver_logger


# Global logger instance
solver_logger = SolverLogger()


def get_logger() -> SolverLogger:
    """Get the global logger instance"""
    return solver_logger
