"""Graded temporal meshes t_i = (i*tau)**gamma on [0, T]."""

from dataclasses import dataclass, field

import numpy as np


class InvalidParameterError(ValueError):
    """Raised when a constructor receives parameters outside its domain."""


@dataclass(frozen=True)
class GradedMesh:
    T: float
    N: int
    gamma: float
    nodes: np.ndarray = field(repr=False)

    @property
    def tau(self):
        """Base step T**(1/gamma) / N."""
        return self.T ** (1.0 / self.gamma) / self.N

    @property
    def steps(self):
        """Step lengths tau_1..tau_N as a length-N array."""
        return np.diff(self.nodes)

    def step(self, n):
        return self.nodes[n] - self.nodes[n - 1]


def build_graded_mesh(T, N, gamma):
    """Nodes from the closed formula, with the last node pinned to T.

    Every node is evaluated independently so no rounding accumulates
    along the grid.
    """
    if not T > 0:
        raise InvalidParameterError(f"T must be positive, got {T}")
    if int(N) != N or N < 1:
        raise InvalidParameterError(f"N must be an integer >= 1, got {N}")
    if not gamma >= 1:
        raise InvalidParameterError(f"gamma must be >= 1, got {gamma}")
    N = int(N)
    tau = T ** (1.0 / gamma) / N
    nodes = (np.arange(N + 1) * tau) ** gamma
    nodes[0] = 0.0
    nodes[-1] = T
    nodes.flags.writeable = False
    return GradedMesh(T=float(T), N=N, gamma=float(gamma), nodes=nodes)


@dataclass
class PropertyReport:
    """Outcome of check_mesh_properties; violation lists hold indices n."""

    ratio_violations: list
    step_lower_violations: list
    step_upper_violations: list

    @property
    def ok(self):
        return not (self.ratio_violations or self.step_lower_violations or self.step_upper_violations)

    @property
    def violations(self):
        return sorted(set(self.ratio_violations) | set(self.step_lower_violations) | set(self.step_upper_violations))


def check_mesh_properties(mesh):
    """Check t_n <= 2**gamma t_{n-1} and the two-sided step bound for n >= 2.

    The step bound is gamma*tau*t_{n-1}**(1-1/gamma) <= tau_n <=
    gamma*tau*t_n**(1-1/gamma). Each comparison is allowed a few ulps of
    slack relative to the compared magnitude.
    """
    t = mesh.nodes
    g = mesh.gamma
    tau = mesh.tau
    eps = 4 * np.finfo(float).eps
    ratio, lower, upper = [], [], []
    for n in range(2, mesh.N + 1):
        tn, tp = t[n], t[n - 1]
        step = tn - tp
        bound = 2.0**g * tp
        if tn > bound * (1 + eps):
            ratio.append(n)
        lo = g * tau * tp ** (1 - 1 / g)
        hi = g * tau * tn ** (1 - 1 / g)
        # the step is a difference of nodes, so its rounding scales with t_n
        slack = eps * max(tn, hi)
        if step < lo - slack:
            lower.append(n)
        if step > hi + slack:
            upper.append(n)
    return PropertyReport(ratio, lower, upper)
