"""Exceptions raised by the forbcfg searches and evaluators."""

from __future__ import annotations

from typing import TYPE_CHECKING

if TYPE_CHECKING:
    from pydantic import BaseModel


class ForbCfgError(Exception):
    """Base class for every error raised deliberately by this package."""


class InfeasibleSizeError(ForbCfgError, ValueError):
    """An instance exceeds one of the configured size guards."""

    def __init__(self, what: str, size: int, limit: int) -> None:
        self.what = what
        self.size = size
        self.limit = limit

        super().__init__(f"{what} has size {size:,}, above the configured limit of {limit:,}")


class BudgetExceededError(ForbCfgError, RuntimeError):
    """A node budget ran out before the search finished.

    The best value found so far is a valid lower bound and travels with the error.
    """

    def __init__(self, budget: int, lower_bound: float, partial: BaseModel | None = None) -> None:
        self.budget = budget
        self.lower_bound = lower_bound
        self.partial = partial

        super().__init__(
            f"Node budget of {budget:,} exhausted; best value found so far is {lower_bound}",
        )


class NotGoodChoiceError(ForbCfgError, ValueError):
    """A good choice was required, but some triple carries I or Ic."""

    def __init__(self, triple: tuple[int, int, int]) -> None:
        self.triple = triple

        super().__init__(f"Choice is not good: triple {triple} maps to I or Ic")


class DivergentParameterError(ForbCfgError, ValueError):
    """The series for g(k, α) and λ(α) only converge for α > 1."""


class DomainError(ForbCfgError, ValueError):
    """Parameters fall outside the range in which a bound is stated."""
