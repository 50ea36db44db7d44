"""Exception hierarchy shared by all analysis modules."""


class CraneMarketError(Exception):
    pass


class InputError(CraneMarketError, ValueError):
    """Bad or inconsistent input data. Carries an optional location."""

    def __init__(self, message, row=None, column=None):
        self.row = row
        self.column = column
        loc = []
        if row is not None:
            loc.append(f"row {row}")
        if column is not None:
            loc.append(f"column {column}")
        if loc:
            message = f"{message} ({', '.join(loc)})"
        super().__init__(message)


class NumericalError(CraneMarketError, ArithmeticError):
    """A computation failed to produce a valid numeric result."""


class ConvergenceError(NumericalError):
    def __init__(self, message, last_iterate=None, residual=None):
        super().__init__(message)
        self.last_iterate = last_iterate
        self.residual = residual
