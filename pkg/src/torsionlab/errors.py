"""Exception hierarchy.

``UsageError`` subclasses signal malformed input (CLI exit code 1);
``DomainError`` subclasses signal a mathematically unsuitable input
(CLI exit code 2).
"""


class TorsionLabError(Exception):
    pass


class UsageError(TorsionLabError):
    pass


class DomainError(TorsionLabError):
    pass


class ParseError(UsageError):
    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        where = ""
        if line is not None:
            where = f"line {line}"
            if column is not None:
                where += f", column {column}"
            where += ": "
        super().__init__(where + message)


class UnknownGenerator(ParseError):
    pass


class DeficiencyMismatch(UsageError):
    pass


class InvalidParameter(UsageError):
    pass


class MissingPeripheralData(UsageError):
    pass


class CentralElement(DomainError):
    pass


class CentralMeridian(CentralElement):
    pass


class InvalidRepresentation(DomainError):
    pass


class NotKnotLike(DomainError):
    pass


class InvalidComplex(DomainError):
    pass


class InvalidBasis(DomainError):
    pass


class DegenerateComplex(DomainError):
    pass


class NotRegular(DomainError):
    pass


class NotMuRegular(DomainError):
    pass


class DegeneratePairing(DomainError):
    pass


class NonRegularTheta(DomainError):
    pass
