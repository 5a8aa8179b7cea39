"""Exception types raised by the solvers."""

from __future__ import annotations


class SingularityError(ArithmeticError):
    """A denominator or pivot vanished.

    ``quantity`` names the offending expression and ``index`` is the grid
    position at which it happened (``None`` for scalar evaluations).
    """

    def __init__(self, quantity: str, magnitude: float = 0.0, index=None):
        self.quantity = quantity
        self.magnitude = magnitude
        self.index = index
        where = "" if index is None else f" at grid index {index}"
        super().__init__(f"singular {quantity} (|value| = {magnitude:.3e}){where}")


class ConvergenceError(RuntimeError):
    def __init__(self, message: str, residual: float, iterations: int):
        self.residual = residual
        self.iterations = iterations
        super().__init__(f"{message} (residual {residual:.3e} after {iterations} iterations)")


class IntegrationError(FloatingPointError):
    def __init__(self, message: str, step: int):
        self.step = step
        super().__init__(f"{message} at step {step}")
