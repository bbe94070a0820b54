"""Exception types shared across the pipeline."""


class NumericalError(RuntimeError):
    """A numerical consistency check failed beyond its tolerance."""


class InvalidStateError(NumericalError):
    """A density matrix violated trace or positivity constraints."""


class IntegrationError(NumericalError):
    """The ODE integrator failed (step-size underflow or non-convergence)."""
