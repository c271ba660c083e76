"""Shared failure modes.

Enumerations never truncate silently: when a search box exceeds its cell
budget the computation stops with BudgetError so that no statistic is
poisoned by a partial scan.
"""


class BudgetError(RuntimeError):
    """An enumeration box exceeded the configured cell budget."""


class SingularBasisError(ValueError):
    """A lattice basis (or body) is singular / degenerate."""


DEFAULT_CELL_BUDGET = 100_000_000
