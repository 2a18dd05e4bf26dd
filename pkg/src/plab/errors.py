class PlabError(Exception):
    pass


class ParameterError(PlabError, ValueError):
    pass


class ResolutionError(PlabError, ValueError):
    pass


class DegenerateBallError(PlabError, ValueError):
    pass


class HypothesisError(PlabError, ValueError):
    """A theorem's hypothesis is not met by the requested parameters."""


class OverflowModularError(PlabError, ArithmeticError):
    pass


class AlignmentError(PlabError, ValueError):
    pass


class AggregationError(PlabError, ValueError):
    pass
