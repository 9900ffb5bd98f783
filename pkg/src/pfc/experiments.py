"""Experiment harnesses: seeded initial data, convergence ladders on random
meshes, scheme comparisons, and polycrystal growth with adaptive stepping.

All randomness is drawn from the library's splitmix generator in row-major
grid order, so every run replays bit-identically from its seed.  Results
are returned as plain records and optionally written as CSV (comma
separator, header row, 17 significant digits).
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field

import numpy as np

from .adaptive import AdaptiveConfig, adaptive_run
from .grid import Field, Grid2D, l2_norm, save_snapshot
from .kernels import eigen_bounds
from .mesh import R_SUP, TimeMesh, analyze, random_mesh, uniform_mesh
from .model import (EnergyRecord, PfcParams, energy, exact_solution,
                    manufactured_forcing, mass, modified_energy)
from .rng import SplitMix64
from .steppers import StepperState, run_fixed_mesh

FMT = "%.17g"


def random_initial(mean: float, amp: float, grid: Grid2D, seed: int) -> Field:
    """mean + amp * U(-1, 1) per grid point, drawn in row-major order."""
    if amp < 0:
        raise ValueError("amp must be nonnegative")
    gen = SplitMix64(seed)
    vals = np.fromiter((gen.uniform_sym() for _ in range(grid.M * grid.M)),
                       dtype=np.float64, count=grid.M * grid.M)
    return Field(grid, mean + amp * vals.reshape(grid.M, grid.M))


DEFAULT_PATCHES = [((128.0, 64.0), 10.0, 0.2),
                   ((64.0, 196.0), 10.0, 0.3),
                   ((196.0, 196.0), 10.0, 0.9)]


def patched_initial(grid: Grid2D, patches=None, base: float = 0.285,
                    seed: int = 0) -> Field:
    """Constant background with uniform noise inside square seed patches.

    Each patch is (center, side, amp); perturbations compose additively if
    patches overlap.
    """
    if patches is None:
        patches = DEFAULT_PATCHES
    gen = SplitMix64(seed)
    vals = np.full((grid.M, grid.M), float(base))
    for (cx, cy), side, amp in patches:
        half = side / 2.0
        in_x = np.abs(grid.X[:, 0] - cx) <= half
        in_y = np.abs(grid.Y[0, :] - cy) <= half
        ii = np.nonzero(in_x)[0]
        jj = np.nonzero(in_y)[0]
        for i in ii:
            for j in jj:
                vals[i, j] += amp * gen.uniform_sym()
    return Field(grid, vals)


def write_csv(path, header: list[str], rows):
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(FMT % v if isinstance(v, float) else str(v)
                              for v in row) + "\n")


def energy_rows(records: list[EnergyRecord]):
    return [(r.t, r.tau, r.E, r.E_mod, r.mass, r.linf, r.iters) for r in records]

ENERGY_HEADER = ["t", "tau", "E", "E_mod", "mass", "linf", "iters"]


@dataclass
class ConvergenceRow:
    N: int
    tau_max: float
    error: float
    order: float  # nan for the first row
    max_ratio: float
    n1: int


def run_bdf2_forced(mesh: TimeMesh, grid: Grid2D, p: PfcParams) -> float:
    """Forced-problem run from the exact initial profile; returns the L2 error."""
    phi0 = exact_solution(0.0, grid)
    forcing = lambda t: manufactured_forcing(t, grid, p)
    state, _ = run_fixed_mesh(phi0, mesh.steps, p, "bdf2", forcing_fn=forcing)
    ref = exact_solution(mesh.T, grid)
    return l2_norm(Field(grid, state.phi_prev.values - ref.values))


def run_convergence(M: int = 128, L: float = 8.0, eps: float = 0.02,
                    T: float = 1.0, ladder=(20, 40, 80, 160, 320),
                    seed: int = 2023, mesh_kind: str = "random") -> list[ConvergenceRow]:
    """Error ladder over refining meshes; order from consecutive rows."""
    grid = Grid2D(M, L)
    p = PfcParams(eps, grid)
    rows: list[ConvergenceRow] = []
    for i, N in enumerate(ladder):
        if mesh_kind == "random":
            mesh = random_mesh(N, T, seed + i)
        else:
            mesh = uniform_mesh(N, T)
        err = run_bdf2_forced(mesh, grid, p)
        rep = analyze(mesh)
        n1 = sum(1 for r in mesh.ratios if r >= R_SUP)
        if rows:
            prev = rows[-1]
            order = math.log(prev.error / err) / math.log(prev.tau_max / mesh.max_step)
        else:
            order = float("nan")
        rows.append(ConvergenceRow(N, mesh.max_step, err, order, rep.max_ratio, n1))
    return rows


def collect_energy(phi_seq, tau_seq, iters_seq, p: PfcParams) -> list[EnergyRecord]:
    """Energy/mass log for a stored trajectory (phi_seq[0] is the initial data)."""
    recs = [EnergyRecord(0.0, 0.0, energy(phi_seq[0], p), energy(phi_seq[0], p),
                         mass(phi_seq[0]), float(np.max(np.abs(phi_seq[0].values))), 0)]
    t = 0.0
    for k, tau in enumerate(tau_seq):
        t += tau
        phi, prev = phi_seq[k + 1], phi_seq[k]
        r_next = tau_seq[k + 1] / tau if k + 1 < len(tau_seq) else 0.0
        recs.append(EnergyRecord(t, tau, energy(phi, p),
                                 modified_energy(phi, prev, tau, r_next, p),
                                 mass(phi), float(np.max(np.abs(phi.values))),
                                 iters_seq[k]))
    return recs


def run_with_energy_log(phi0: Field, steps, p: PfcParams, scheme: str = "bdf2"):
    """Fixed-mesh run that records an EnergyRecord per accepted step."""
    state = StepperState(phi0)
    recs = [EnergyRecord(0.0, 0.0, energy(phi0, p), energy(phi0, p), mass(phi0),
                         float(np.max(np.abs(phi0.values))), 0)]
    steps = list(steps)
    stats_all = []
    from . import steppers as _st
    for k, tau in enumerate(steps):
        if scheme == "bdf2":
            phi_new, stats = _st.bdf2_step(state, tau, p)
        elif scheme == "cn":
            phi_new, stats = _st.cn_step(state, tau, p)
        elif scheme == "cncs":
            if state.phi_prev2 is None:
                phi_new, stats = _st.cs1_step(state, tau, p)
            else:
                phi_new, stats = _st.cncs_step(state, tau, p)
        else:
            raise ValueError(f"unknown scheme {scheme!r}")
        prev = state.phi_prev
        state = state.advanced(phi_new, tau)
        r_next = steps[k + 1] / tau if k + 1 < len(steps) else 0.0
        recs.append(EnergyRecord(state.t, tau, energy(phi_new, p),
                                 modified_energy(phi_new, prev, tau, r_next, p),
                                 mass(phi_new),
                                 float(np.max(np.abs(phi_new.values))),
                                 stats.iterations))
        stats_all.append(stats)
    return state, recs, stats_all


@dataclass
class CompareResult:
    profiles: dict = field(default_factory=dict)   # (scheme, tau) -> midline array
    reference: np.ndarray | None = None
    mean_iters: dict = field(default_factory=dict)  # (scheme, tau) -> float
    energy_logs: dict = field(default_factory=dict)


def midline(phi: Field) -> np.ndarray:
    """Horizontal profile along y = L/2."""
    return phi.values[:, phi.grid.M // 2].copy()


def run_compare(M: int = 128, L: float = 64.0, eps: float = 0.2,
                seed: int = 2023, profile_T: float = 0.01,
                profile_taus=(1e-2, 1e-3, 5e-4, 2.5e-4), ref_tau: float = 1e-4,
                energy_T: float = 5.0, energy_taus=(1e-1, 1e-2, 1e-3),
                schemes=("bdf2", "cn", "cncs"),
                with_energy_runs: bool = True) -> CompareResult:
    """Short-horizon profile comparison plus (optionally) energy-curve runs."""
    grid = Grid2D(M, L)
    p = PfcParams(eps, grid)
    phi0 = random_initial(0.1, 0.02, grid, seed)
    out = CompareResult()

    n_ref = round(profile_T / ref_tau)
    ref_state, _ = run_fixed_mesh(phi0, [ref_tau] * n_ref, p, "bdf2")
    out.reference = midline(ref_state.phi_prev)

    for tau in profile_taus:
        n = round(profile_T / tau)
        for scheme in schemes:
            state, _ = run_fixed_mesh(phi0, [tau] * n, p, scheme)
            out.profiles[(scheme, tau)] = midline(state.phi_prev)

    if with_energy_runs:
        for tau in energy_taus:
            n = round(energy_T / tau)
            for scheme in schemes:
                _, recs, stats = run_with_energy_log(phi0, [tau] * n, p, scheme)
                out.energy_logs[(scheme, tau)] = recs
                out.mean_iters[(scheme, tau)] = float(
                    np.mean([s.iterations for s in stats]))
    return out


def oscillation_indicator(profile: np.ndarray) -> int:
    """Sign changes of the discrete second difference along a profile."""
    d2 = profile[2:] - 2.0 * profile[1:-1] + profile[:-2]
    signs = np.sign(d2)
    signs = signs[signs != 0]
    return int(np.sum(signs[1:] != signs[:-1]))


@dataclass
class PolycrystalResult:
    uniform_records: list[EnergyRecord]
    adaptive_records: list[EnergyRecord]
    adaptive_steps: int
    adaptive_taus: list[float]
    adaptive_ratios: list[float]


def run_polycrystal(M: int = 256, L: float = 256.0, eps: float = 0.25,
                    seed: int = 2023, T: float = 50.0, uniform_tau: float = 0.05,
                    cfg: AdaptiveConfig | None = None) -> PolycrystalResult:
    """Uniform vs adaptive comparison leg from the same seeded initial data."""
    grid = Grid2D(M, L)
    p = PfcParams(eps, grid)
    phi0 = patched_initial(grid, seed=seed)
    if cfg is None:
        cfg = AdaptiveConfig()

    n_uni = round(T / uniform_tau)
    _, uni_recs, _ = run_with_energy_log(phi0, [uniform_tau] * n_uni, p, "bdf2")

    ada_recs = [uni_recs[0]]

    def observer(state, step):
        prev = state.phi_prev2
        ada_recs.append(EnergyRecord(
            state.t, step.tau_accepted, energy(state.phi_prev, p),
            modified_energy(state.phi_prev, prev, step.tau_accepted, 0.0, p),
            mass(state.phi_prev),
            float(np.max(np.abs(state.phi_prev.values))),
            step.stats.iterations))

    _, log = adaptive_run(phi0, T, cfg, p, observer=observer)
    taus = log.taus
    ratios = [taus[k] / taus[k - 1] for k in range(1, len(taus))]
    return PolycrystalResult(uni_recs, ada_recs, log.steps, taus, ratios)


def run_polycrystal_long(M: int = 256, L: float = 256.0, eps: float = 0.25,
                         seed: int = 2023, T: float = 1000.0,
                         snapshot_times=(1, 100, 150, 400, 800, 1000),
                         out_dir: str | None = None,
                         cfg: AdaptiveConfig | None = None):
    """Long adaptive leg with snapshots at the first step reaching each target."""
    grid = Grid2D(M, L)
    p = PfcParams(eps, grid)
    phi0 = patched_initial(grid, seed=seed)
    if cfg is None:
        cfg = AdaptiveConfig()
    targets = sorted(snapshot_times)
    pending = list(targets)
    recs = []

    def observer(state, step):
        recs.append(EnergyRecord(
            state.t, step.tau_accepted, energy(state.phi_prev, p),
            energy(state.phi_prev, p), mass(state.phi_prev),
            float(np.max(np.abs(state.phi_prev.values))),
            step.stats.iterations))
        while pending and state.t >= pending[0]:
            tgt = pending.pop(0)
            if out_dir is not None:
                save_snapshot(os.path.join(out_dir, f"snapshot_t{tgt:g}.csv"),
                              state.phi_prev, state.t)

    state, log = adaptive_run(phi0, T, cfg, p, observer=observer)
    return state, log, recs


def kernels_report(mesh: TimeMesh, out_path: str | None = None):
    """Per-level kernel diagnostics plus the eigenvalue certificate footer."""
    from .kernels import bdf2_coeffs, doc_kernels, verify_orthogonality

    c = bdf2_coeffs(mesh)
    doc = doc_kernels(mesh)
    row_res = np.abs(doc.row_sums() - mesh.steps) / mesh.steps
    ortho = verify_orthogonality(mesh)
    eb = eigen_bounds(mesh)
    rows = [(n, float(mesh.steps[n - 1]), float(mesh.ratios[n - 1]),
             float(c.b0[n - 1]), float(c.b1[n - 1]) if n > 1 else 0.0,
             float(row_res[n - 1]), ortho)
            for n in range(1, mesh.N + 1)]
    if out_path is not None:
        write_csv(out_path, ["n", "tau", "r", "b0", "b1", "rowsum_rel_residual",
                             "ortho_residual"], rows)
        with open(out_path, "a") as fh:
            fh.write(f"# lam_min={eb.lam_min:.17g},lam_max={eb.lam_max:.17g},"
                     f"quad_const={eb.quad_const:.17g},s1_ok={eb.s1_ok}\n")
    return rows, eb
