"""Shared-control guiding vector field simulator."""

from ._higvf import (
    CommandError,
    ScenarioError,
    Simulation,
    solve_qp,
    validate_scenario,
)

__all__ = ["CommandError", "ScenarioError", "Simulation", "solve_qp", "validate_scenario"]
