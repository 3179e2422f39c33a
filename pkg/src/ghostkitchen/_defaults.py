"""Load-time defaults for the ghostkitchen package."""

import os
from pathlib import Path

EPS: float = 1e-9
"""Tolerance for every time comparison, in minutes. Equality at a bound is feasible."""

DEFAULT_OUTPUT_ROOT: Path = Path(os.environ.get("GHOSTKITCHEN_OUTPUT", "runs"))

DEFAULT_SEED: int = 0
