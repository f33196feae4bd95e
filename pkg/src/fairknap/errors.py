"""Exception hierarchy shared by every fairknap module."""


class FairKnapError(Exception):
    """Base class for all errors raised by fairknap."""


class InvalidReference(FairKnapError):
    """A good id or agent index does not exist in the instance."""


class StructuralError(FairKnapError):
    """An allocation is not a partition of the instance's goods."""


class InfeasibleAllocation(FairKnapError):
    """Some real agent's bundle exceeds its budget."""


class ValidationError(FairKnapError):
    def __init__(self, violations):
        self.violations = list(violations)
        lines = "; ".join(str(v) for v in self.violations)
        super().__init__(f"invalid instance: {lines}")


class ReplayDivergence(FairKnapError):
    def __init__(self, step, reason):
        self.step = step
        self.reason = reason
        super().__init__(f"replay diverged at step {step}: {reason}")


class EnumerationLimit(FairKnapError):
    """A bundle is too large for exhaustive subset enumeration."""


class NoCutError(FairKnapError):
    """find_two_cut was called on a pair whose envy count is below two."""


class UnsupportedFamily(FairKnapError):
    pass


class MustIntegerize(FairKnapError):
    pass


class MismatchedInstances(FairKnapError):
    pass
