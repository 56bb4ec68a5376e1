"""Exception hierarchy shared by all subpackages.

Every error carries a module-qualified ``code`` so the command line can
report failures in a machine-parsable way.
"""

from __future__ import annotations


class HerglotzError(Exception):
    code = "herglotz.error"


# --- symexpr -----------------------------------------------------------------


class SymExprError(HerglotzError):
    code = "symexpr.error"


class ParseError(SymExprError):
    code = "symexpr.parse"

    def __init__(self, message: str, position: int | None = None):
        self.position = position
        if position is not None:
            message = f"{message} at position {position}"
        super().__init__(message)


class UndeclaredIdentifier(ParseError):
    code = "symexpr.undeclared"


class DerivativeOfNonField(ParseError):
    code = "symexpr.nonfield_derivative"


class DerivativeOrderError(SymExprError):
    code = "symexpr.order_overflow"


class ActionDependenceError(SymExprError):
    code = "symexpr.action_dependence"


class UnboundSymbol(SymExprError):
    code = "symexpr.unbound"


class EvaluationDomainError(SymExprError):
    code = "symexpr.domain"


# --- elderive ----------------------------------------------------------------


class DerivationError(HerglotzError):
    code = "elderive.error"


class NonConstantGamma(DerivationError):
    code = "elderive.nonconstant_gamma"


class UnknownPreset(DerivationError):
    code = "elderive.unknown_preset"


class ProblemFormatError(DerivationError):
    code = "elderive.problem_format"


# --- herglotz1d --------------------------------------------------------------


class IntegrationError(HerglotzError):
    code = "herglotz1d.error"


class BlowUp(IntegrationError):
    code = "herglotz1d.blowup"

    def __init__(self, step: int, message: str = ""):
        self.step = step
        super().__init__(message or f"non-finite state at step {step}")


class Singular(IntegrationError):
    code = "herglotz1d.singular"


class ShootingError(IntegrationError):
    code = "herglotz1d.shooting"

    def __init__(self, message: str, best_residual: float, best_v0: float):
        self.best_residual = best_residual
        self.best_v0 = best_v0
        super().__init__(f"{message} (best residual {best_residual:.3e} at v0={best_v0:.17g})")


class NoBracket(ShootingError):
    code = "herglotz1d.no_bracket"


class MaxIterExceeded(ShootingError):
    code = "herglotz1d.max_iter"


# --- fieldsim ----------------------------------------------------------------


class SimulationError(HerglotzError):
    code = "fieldsim.error"


class CourantViolation(SimulationError):
    code = "fieldsim.courant"


class NonFiniteField(SimulationError):
    code = "fieldsim.nonfinite"

    def __init__(self, step: int):
        self.step = step
        super().__init__(f"non-finite field at time step {step}")


class LinearSolveError(SimulationError):
    code = "fieldsim.linear_solve"


class NonlinearActionDependence(SimulationError):
    code = "fieldsim.nonlinear_s"


class NonPositiveSample(SimulationError):
    code = "fieldsim.nonpositive"


# --- dispersion / stationarity / cli -----------------------------------------


class DispersionError(HerglotzError):
    code = "dispersion.error"


class DegenerateBump(HerglotzError):
    code = "stationarity.degenerate_bump"


class NonFiniteAction(HerglotzError):
    code = "stationarity.nonfinite"


class ConfigError(HerglotzError):
    code = "cli.config"
