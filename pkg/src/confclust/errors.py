"""Exception and warning types raised across the pipeline.

Every error carries an ``exit_code`` so the command line can map a failure
to the documented process status without a lookup table.
"""


class ConfclustError(Exception):
    """Base class for all library errors.

    ``stage`` is filled in by the pipeline with the name of the step that
    failed.
    """

    exit_code = 2
    stage = None


class ParseError(ConfclustError):
    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        where = []
        if line is not None:
            where.append(f"line {line}")
        if column is not None:
            where.append(f"column {column}")
        if where:
            message = f"{message} ({', '.join(where)})"
        super().__init__(message)


class EmptyInput(ConfclustError):
    pass


class FormatError(ConfclustError):
    pass


class DimensionMismatch(ConfclustError):
    pass


class DuplicateId(ConfclustError):
    def __init__(self, point_id):
        self.point_id = point_id
        super().__init__(f"duplicate point id {point_id!r}")


class InvalidInput(ConfclustError):
    pass


class InvalidParameter(ConfclustError, ValueError):
    pass


class MissingLabel(ConfclustError):
    pass


class EmptyCluster(ConfclustError):
    pass


class Undefined(ConfclustError):
    pass


class NoEdges(ConfclustError):
    pass


class EmptySet(ConfclustError):
    """No prefix vertex survived the degree filter; extraction treats this as the end."""


class ConvergenceError(ConfclustError):
    """Iterative eigensolver ran out of iterations.

    The best iterate seen is kept on the exception so callers can inspect
    or reuse it.
    """

    exit_code = 3

    def __init__(self, message, eigenvalue=None, vector=None, residual=None, round_index=None):
        self.eigenvalue = eigenvalue
        self.vector = vector
        self.residual = residual
        self.round_index = round_index
        super().__init__(message)


class ConvergenceWarning(UserWarning):
    pass
