class GptLabError(Exception):
    """Base class for all library errors."""


class DimensionMismatch(GptLabError, ValueError):
    pass


class NotPointed(GptLabError, ValueError):
    pass


class NotGenerating(GptLabError, ValueError):
    pass


class Degenerate(GptLabError, ValueError):
    pass


class SearchBudgetExceeded(GptLabError):
    pass


class ObservableMismatch(GptLabError, ValueError):
    pass


class NotExposed(GptLabError, ValueError):
    pass


class InvalidEffect(GptLabError, ValueError):
    pass


class InvalidState(GptLabError, ValueError):
    pass


class CorrectionNotContractive(GptLabError, ValueError):
    pass


class NotAGroup(GptLabError, ValueError):
    pass


class NotTransitive(GptLabError, ValueError):
    pass


class NotEquivariant(GptLabError, ValueError):
    pass


class NotObservable(GptLabError, ValueError):
    pass
