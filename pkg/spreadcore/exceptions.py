"""Provide exception classes for the spreadcore package."""


def _rebuild(cls, args, state):
    exception = cls.__new__(cls)
    Exception.__init__(exception, *args)
    exception.__dict__.update(state)
    return exception


class SpreadcoreException(Exception):
    """Base exception class for exceptions that occur within this package."""

    def __reduce__(self):
        """Pickle through the instance state so worker processes can raise."""
        return _rebuild, (type(self), self.args, self.__dict__)


class InvalidInvocation(SpreadcoreException):
    """Indicate that the code to execute cannot be completed."""


class ExpressionException(SpreadcoreException):
    """Indicate a problem parsing or evaluating a coefficient expression."""


class ExprSyntaxError(ExpressionException):
    """Indicate that an expression does not follow the grammar."""

    def __init__(self, text, offset, message):
        """Initialize an ExprSyntaxError instance.

        :param text: The expression text being parsed.
        :param offset: The byte offset of the offending token.
        :param message: A description of what was expected.

        """
        self.text = text
        self.offset = offset
        super(ExprSyntaxError, self).__init__(f"{message} at offset {offset}: {text!r}")


class UnknownIdentifier(ExpressionException):
    """Indicate that a name is neither a function, a constant nor a known name."""

    def __init__(self, name, offset):
        """Initialize an UnknownIdentifier instance.

        :param name: The offending identifier.
        :param offset: The byte offset of the identifier.

        """
        self.name = name
        self.offset = offset
        super(UnknownIdentifier, self).__init__(
            f"unknown identifier {name!r} at offset {offset}"
        )


class UnboundVariable(ExpressionException):
    """Indicate that evaluation met a variable without a binding."""

    def __init__(self, name):
        """Initialize an UnboundVariable instance.

        :param name: The variable without a binding.

        """
        self.name = name
        super(UnboundVariable, self).__init__(f"variable {name!r} is not bound")


class NonFiniteResult(ExpressionException):
    """Indicate that a sub-expression evaluated to an infinity or NaN."""

    def __init__(self, expression):
        """Initialize a NonFiniteResult instance.

        :param expression: The printed form of the innermost offending
            sub-expression.

        """
        self.expression = expression
        super(NonFiniteResult, self).__init__(f"non-finite value from {expression}")


class ConfigError(SpreadcoreException):
    """Indicate an invalid habitat configuration."""

    def __init__(self, section, key, message):
        """Initialize a ConfigError instance.

        :param section: The config section, or ``None``.
        :param key: The config key, or ``None``.
        :param message: What is wrong with the entry.

        """
        self.section = section
        self.key = key
        location = ".".join(part for part in (section, key) if part)
        prefix = f"[{location}] " if location else ""
        super(ConfigError, self).__init__(f"{prefix}{message}")


class DiscretizationException(SpreadcoreException):
    """Indicate that a grid or kernel sampling cannot be built."""


class GridTooCoarse(DiscretizationException):
    """Indicate that the grid spacing does not resolve the kernel support."""


class NonFiniteWeight(DiscretizationException):
    """Indicate that a twisted kernel weight overflowed."""


class StepSizeTooLarge(DiscretizationException):
    """Indicate a time step above the order-preserving limit."""

    def __init__(self, dt, dt_max):
        """Initialize a StepSizeTooLarge instance.

        :param dt: The requested time step.
        :param dt_max: The largest admissible time step.

        """
        self.dt = dt
        self.dt_max = dt_max
        super(StepSizeTooLarge, self).__init__(
            f"time step {dt:.6g} exceeds the order-preserving limit {dt_max:.6g}"
        )


class DynamicsException(SpreadcoreException):
    """Indicate a failure while time stepping."""


class NonFiniteState(DynamicsException):
    """Indicate that a state became infinite or NaN."""

    def __init__(self, time):
        """Initialize a NonFiniteState instance.

        :param time: The time at which the state stopped being finite.

        """
        self.time = time
        super(NonFiniteState, self).__init__(f"non-finite state at t={time:.6g}")


class InvariantRegionExit(DynamicsException):
    """Indicate that a cooperative state left the invariant region."""

    def __init__(self, time, excursion):
        """Initialize an InvariantRegionExit instance.

        :param time: The time of the step that left the region.
        :param excursion: The pre-clamp distance outside the region.

        """
        self.time = time
        self.excursion = excursion
        super(InvariantRegionExit, self).__init__(
            f"state left the invariant region by {excursion:.3e} at t={time:.6g}"
        )


class NoConvergence(SpreadcoreException):
    """Indicate that an iteration hit its cap."""

    def __init__(self, what, iterations):
        """Initialize a NoConvergence instance.

        :param what: The iteration that failed to converge.
        :param iterations: The number of iterations performed.

        """
        self.what = what
        self.iterations = iterations
        super(NoConvergence, self).__init__(
            f"{what} did not converge in {iterations} iterations"
        )


class ExtinctionDetected(SpreadcoreException):
    """Indicate that a single-species orbit decayed to zero."""

    def __init__(self, species):
        """Initialize an ExtinctionDetected instance.

        :param species: The species index, 1 or 2.

        """
        self.species = species
        super(ExtinctionDetected, self).__init__(f"species {species} goes extinct")


class NoInteriorMinimum(SpreadcoreException):
    """Indicate that the speed ratio has no interior minimum on the bracket."""

    def __init__(self, samples):
        """Initialize a NoInteriorMinimum instance.

        :param samples: The ``(mu, lambda, ratio)`` samples evaluated.

        """
        self.samples = samples
        super(NoInteriorMinimum, self).__init__(
            f"no interior minimum over mu in"
            f" [{samples[0][0]:.3g}, {samples[-1][0]:.3g}]"
        )


class NotFoundBelowCap(SpreadcoreException):
    """Indicate that no super-solution speed exists below the search cap."""

    def __init__(self, cap):
        """Initialize a NotFoundBelowCap instance.

        :param cap: The largest speed tried.

        """
        self.cap = cap
        super(NotFoundBelowCap, self).__init__(f"no super-solution speed below {cap}")


class DomainTooSmall(SpreadcoreException):
    """Indicate that the truncated line cannot hold the requested run."""


class LevelNotBracketed(SpreadcoreException):
    """Indicate that a relative level is never crossed in a snapshot."""

    def __init__(self, level, time):
        """Initialize a LevelNotBracketed instance.

        :param level: The relative level.
        :param time: The snapshot time.

        """
        self.level = level
        self.time = time
        super(LevelNotBracketed, self).__init__(
            f"level {level} is not attained at t={time:.6g}"
        )


class PoorFit(SpreadcoreException):
    """Indicate that a front position track is not close to linear."""

    def __init__(self, track):
        """Initialize a PoorFit instance.

        :param track: The :class:`.LevelTrack` that failed.

        """
        self.track = track
        super(PoorFit, self).__init__(
            f"level {track.level} fit has r2={track.r2:.4f} (slope {track.slope:.6g})"
        )


class HypothesisFailure(SpreadcoreException):
    """Indicate that a habitat fails a checked hypothesis."""


class HypothesisHB0Violated(HypothesisFailure):
    """Indicate a non-positive or non-periodic coefficient."""

    def __init__(self, coefficient, t, x, value, reason="is not positive"):
        """Initialize a HypothesisHB0Violated instance.

        :param coefficient: The coefficient name, e.g. ``b1``.
        :param t: The time of the first offending sample.
        :param x: The position of the first offending sample.
        :param value: The offending value.
        :param reason: What the sample violates.

        """
        self.coefficient = coefficient
        self.t = t
        self.x = x
        self.value = value
        super(HypothesisHB0Violated, self).__init__(
            f"{coefficient} {reason} at (t={t:.6g}, x={x:.6g}): {value:.6g}"
        )


class HB1Violated(HypothesisFailure):
    """Indicate that the zero solution of a single-species equation is stable."""

    def __init__(self, species, value):
        """Initialize a HB1Violated instance.

        :param species: The species index, 1 or 2.
        :param value: The principal spectrum point found.

        """
        self.species = species
        self.value = value
        super(HB1Violated, self).__init__(
            f"species {species} cannot persist: lambda_0(a{species})={value:.6g} <= 0"
        )


class PreconditionLambdaNonnegative(HypothesisFailure):
    """Indicate a nonhomogeneous problem without a stable linear part."""

    def __init__(self, value):
        """Initialize a PreconditionLambdaNonnegative instance.

        :param value: The principal spectrum point of the linear part.

        """
        self.value = value
        super(PreconditionLambdaNonnegative, self).__init__(
            f"principal spectrum point {value:.6g} is not negative"
        )


class Lemma41Fails(HypothesisFailure):
    """Indicate that the shifted second-species operator is not stable."""

    def __init__(self, value):
        """Initialize a Lemma41Fails instance.

        :param value: The principal spectrum point of the shifted operator.

        """
        self.value = value
        super(Lemma41Fails, self).__init__(
            f"shifted second-species spectrum point {value:.6g} is not negative"
        )


class FrontHitBoundary(HypothesisFailure):
    """Indicate that the front reached the right end of the line."""

    def __init__(self, time, position, limit):
        """Initialize a FrontHitBoundary instance.

        :param time: The snapshot time.
        :param position: The low-level front position.
        :param limit: The closest admissible position.

        """
        self.time = time
        self.position = position
        self.limit = limit
        super(FrontHitBoundary, self).__init__(
            f"front at {position:.6g} passed {limit:.6g} at t={time:.6g}; increase L"
        )


class TaskException(SpreadcoreException):
    """Indicate that a pooled task raised."""

    def __init__(self, original_exception, task_args, task_kwargs):
        """Initialize a TaskException instance.

        :param original_exception: The original exception that occurred.
        :param task_args: The arguments to the task function.
        :param task_kwargs: The keyword arguments to the task function.

        """
        self.original_exception = original_exception
        self.task_args = task_args
        self.task_kwargs = task_kwargs
        super(TaskException, self).__init__(
            f"error in task {type(original_exception).__name__}: {original_exception}"
        )
