"""Command-line interface: ``subradiant <subcommand> --config scenario.yaml``."""

from .config import KINDS, PARAM_MODELS, Scenario, load_scenario, validate_params
from .runners import RUNNERS, paper_table

__all__ = ["KINDS", "PARAM_MODELS", "Scenario", "load_scenario", "validate_params", "RUNNERS", "paper_table"]
