"""Exception hierarchy shared by all bscmatch modules."""


class BscError(Exception):
    """Base class for every error raised by the library."""


class MalformedHeader(BscError):
    pass


class TruncatedData(BscError):
    pass


class EmptyShape(BscError):
    pass


class DegenerateShape(BscError):
    pass


class ParseError(BscError):
    def __init__(self, line, message):
        super().__init__(f"line {line}: {message}")
        self.line = line


class LengthMismatch(BscError, ValueError):
    pass


class ParamMismatch(BscError, ValueError):
    pass


class EmptyMatrix(BscError, ValueError):
    pass


class EmptyInput(BscError, ValueError):
    pass


class NonFiniteInput(BscError, ValueError):
    pass


class SingularSystem(BscError):
    pass


class NonSquare(BscError, ValueError):
    pass


class BadParams(BscError, ValueError):
    pass


class EmptyGallery(BscError, ValueError):
    pass
