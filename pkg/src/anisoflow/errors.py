"""Exception types raised by the simulator."""


class DomainError(ValueError):
    """An argument lies outside the domain of a formula."""


class ConeViolation(RuntimeError):
    """Principal curvatures left the Garding cone at some node."""

    def __init__(self, node, per_j_values, t=None):
        self.node = int(node)
        self.per_j_values = [float(v) for v in per_j_values]
        self.t = t
        where = f" at t={t:.6g}" if t is not None else ""
        super().__init__(
            f"curvature left the cone at node {self.node}{where}: "
            f"sigma_j = {self.per_j_values}"
        )


class NonFinite(RuntimeError):
    """The radial field became non-finite."""

    def __init__(self, node, t=None):
        self.node = int(node)
        self.t = t
        super().__init__(f"non-finite value at node {self.node}")


class StabilityError(RuntimeError):
    """The linearised diffusivity is not positive, so no stable step exists."""
