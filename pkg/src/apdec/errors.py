"""Exception types shared across the package."""


class ConfigError(ValueError):
    """Invalid run or discretisation parameters."""


class MeshError(ValueError):
    """Malformed or invalid mesh data."""


class StateError(ArithmeticError):
    """A state left the admissible set (negative density or pressure).

    ``index`` is the offending DoF (or sample) index, ``value`` the state
    there; ``time`` is filled in by the time loop when known.
    """

    def __init__(self, message, index=None, value=None, time=None):
        super().__init__(message)
        self.index = index
        self.value = value
        self.time = time

    def __str__(self):
        msg = super().__str__()
        where = []
        if self.time is not None:
            where.append(f"t={self.time:.6g}")
        if self.index is not None:
            where.append(f"dof={self.index}")
        if self.value is not None:
            where.append(f"state={list(map(float, self.value))}")
        return f"{msg} ({', '.join(where)})" if where else msg
