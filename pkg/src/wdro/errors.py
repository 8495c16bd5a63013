"""Exception hierarchy shared by every module."""


class WDROError(Exception):
    """Base class for all library errors."""


class InputError(WDROError, ValueError):
    """Invalid user-supplied data (measures, boxes, instances)."""


class NegativeWeight(InputError):
    pass


class MassNotOne(InputError):
    pass


class DimensionMismatch(InputError):
    pass


class EmptySupport(InputError):
    pass


class AtomOutsideBox(InputError):
    def __init__(self, atom, lower, upper):
        self.atom = atom
        self.lower = lower
        self.upper = upper
        super().__init__(f"atom {list(atom)} lies outside box lower={list(lower)} upper={list(upper)}")


class LevelOverflow(InputError):
    pass


class InfeasibleInstance(WDROError):
    pass


class NumericalFailure(WDROError, ArithmeticError):
    pass


class ConfigParseError(WDROError):
    def __init__(self, message, field=None, line=None):
        self.field = field
        self.line = line
        where = []
        if line is not None:
            where.append(f"line {line}")
        if field is not None:
            where.append(f"field '{field}'")
        prefix = f"[{', '.join(where)}] " if where else ""
        super().__init__(prefix + message)
