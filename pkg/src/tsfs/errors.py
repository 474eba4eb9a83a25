"""Exception hierarchy shared by every tsfs module."""


class TSFSError(Exception):
    """Base class for all errors raised by tsfs."""


class InvalidInputError(TSFSError, ValueError):
    """Arguments violate an operation's preconditions."""


class ParseError(TSFSError, ValueError):
    """A data file could not be parsed.

    ``row`` and ``column`` are 1-based locations when known.
    """

    def __init__(self, message, row=None, column=None):
        loc = []
        if row is not None:
            loc.append(f"row {row}")
        if column is not None:
            loc.append(f"column {column}")
        if loc:
            message = f"{message} ({', '.join(loc)})"
        super().__init__(message)
        self.row = row
        self.column = column


class ConnectivityError(TSFSError):
    """A neighbour graph splits into more than one connected component."""

    def __init__(self, n_components, k=None):
        hint = "; increase the number of neighbours" if k is None else (
            f" at k={k}; increase the number of neighbours")
        super().__init__(f"neighbour graph has {n_components} connected components{hint}")
        self.n_components = n_components
        self.k = k


class NumericalError(TSFSError, ArithmeticError):
    """Non-finite values or a singular system were encountered."""


class ConvergenceError(NumericalError):
    """An iterative solver hit its iteration cap."""

    def __init__(self, message, residual=None):
        if residual is not None:
            message = f"{message} (achieved residual {residual:.3e})"
        super().__init__(message)
        self.residual = residual
