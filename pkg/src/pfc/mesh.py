"""Nonuniform time meshes: construction, step-ratio conditions, step-size checks.

A mesh stores the positive step sizes tau_1..tau_N.  Derived quantities are
the time levels t_k and the adjacent step ratios r_k = tau_k / tau_{k-1}
with the convention r_1 = 0.  The ratio conditions are:

  S1:  r_k < r_sup = (3 + sqrt(17)) / 2 for k >= 2;
  S2:  the count N0 of ratios in [1 + sqrt(2), r_sup) is small.

The energy-stability step-size check flags steps with
tau_n > (2 / (3 eps)) * min{(1 + 2 r_n)/(1 + r_n), R(r_n, r_{n+1})},
where the undefined final lookahead ratio defaults to 0.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .rng import SplitMix64

R_SUP = (3.0 + np.sqrt(17.0)) / 2.0
R_TRANSITION = 1.0 + np.sqrt(2.0)


@dataclass
class TimeMesh:
    """Ordered positive time steps with derived levels and ratios."""

    steps: np.ndarray

    def __post_init__(self):
        self.steps = np.asarray(self.steps, dtype=np.float64)
        if self.steps.ndim != 1 or self.steps.size == 0:
            raise ValueError("mesh needs at least one step")
        if np.any(self.steps <= 0):
            raise ValueError("all step sizes must be positive")
        self.times = np.cumsum(self.steps)
        self.ratios = np.zeros_like(self.steps)
        if self.steps.size > 1:
            self.ratios[1:] = self.steps[1:] / self.steps[:-1]

    @property
    def N(self) -> int:
        return self.steps.size

    @property
    def T(self) -> float:
        return float(self.times[-1])

    @property
    def max_step(self) -> float:
        return float(np.max(self.steps))

    @property
    def max_ratio(self) -> float:
        return float(np.max(self.ratios)) if self.N > 1 else 0.0

    def satisfies_s1(self) -> bool:
        return bool(np.all(self.ratios < R_SUP))


@dataclass
class MeshReport:
    max_step: float
    max_ratio: float
    s1_violations: list[int] = field(default_factory=list)
    n0: int = 0
    restriction_violations: list[int] = field(default_factory=list)


def uniform_mesh(N: int, T: float) -> TimeMesh:
    if N < 1 or T <= 0:
        raise ValueError("need N >= 1 and T > 0")
    return TimeMesh(np.full(N, T / N))


def random_mesh(N: int, T: float, seed: int) -> TimeMesh:
    """Random mesh tau_k = T sigma_k / S with sigma_k ~ U(0,1), S = sum sigma_k."""
    if N < 1 or T <= 0:
        raise ValueError("need N >= 1 and T > 0")
    gen = SplitMix64(seed)
    sigma = np.array([gen.uniform() for _ in range(N)])
    return TimeMesh(T * sigma / sigma.sum())


def mesh_from_ratios(tau1: float, ratios) -> TimeMesh:
    """Build a mesh from the first step and the ratios r_2..r_N."""
    steps = [float(tau1)]
    for r in ratios:
        steps.append(steps[-1] * float(r))
    return TimeMesh(np.array(steps))


def stability_bound(z: float, s: float) -> float:
    """The quadratic-form ratio function (2 + 4z - z^2)/(1+z) - s/(1+s)."""
    if not (0 <= z < R_SUP and 0 <= s < R_SUP):
        raise ValueError(f"arguments must lie in [0, {R_SUP:.4f}), got z={z}, s={s}")
    return (2.0 + 4.0 * z - z * z) / (1.0 + z) - s / (1.0 + s)


def check_restriction(mesh: TimeMesh, eps: float, lookahead: float = 0.0) -> list[int]:
    """Indices n (1-based) violating the energy-stability step-size bound.

    ``lookahead`` supplies r_{N+1} for the final step; it defaults to 0,
    the most favorable value.
    """
    if not (0 < eps < 1):
        raise ValueError(f"eps must lie in (0, 1), got {eps}")
    bad = []
    for n in range(1, mesh.N + 1):
        rn = mesh.ratios[n - 1]
        rnp1 = mesh.ratios[n] if n < mesh.N else lookahead
        if rn >= R_SUP or rnp1 >= R_SUP:
            bad.append(n)  # outside the domain of the bound: flag conservatively
            continue
        bound = (2.0 / (3.0 * eps)) * min(
            (1.0 + 2.0 * rn) / (1.0 + rn), stability_bound(rn, rnp1)
        )
        if mesh.steps[n - 1] > bound:
            bad.append(n)
    return bad


def analyze(mesh: TimeMesh, eps: float | None = None) -> MeshReport:
    """Populate a MeshReport; restriction checks run only when eps is given."""
    s1 = [k for k in range(2, mesh.N + 1) if mesh.ratios[k - 1] >= R_SUP]
    n0 = int(
        np.sum((mesh.ratios >= R_TRANSITION) & (mesh.ratios < R_SUP))
    )
    restr = check_restriction(mesh, eps) if eps is not None else []
    return MeshReport(mesh.max_step, mesh.max_ratio, s1, n0, restr)


def parse_mesh_spec(spec: str) -> TimeMesh:
    """Parse `uniform:N,T` or `random:N,T,seed` or a path to a tau-per-line file."""
    if spec.startswith("uniform:"):
        n, t = spec[len("uniform:"):].split(",")
        return uniform_mesh(int(n), float(t))
    if spec.startswith("random:"):
        n, t, s = spec[len("random:"):].split(",")
        return random_mesh(int(n), float(t), int(s))
    with open(spec) as fh:
        steps = [float(line) for line in fh if line.strip()]
    return TimeMesh(np.array(steps))
