"""Variable-step BDF2 kernels, their DOC (orthogonal-convolution) inverses,
and matrix certificates for positive definiteness.

The two-step kernels on a nonuniform mesh are

  b0^(1) = 1/tau_1,
  b0^(n) = (1 + 2 r_n) / (tau_n (1 + r_n)),
  b1^(n) = -r_n^2 / (tau_n (1 + r_n))        for n >= 2,

and the DOC kernels theta are their convolution inverse.  The closed-form
product

  theta_{n-j}^(n) = (1 / b0^(j)) * prod_{i=j+1..n} r_i^2 / (1 + 2 r_i)

is used for construction (robust for long meshes); the defining recursion
is retained as a cross-check.  Certificates work with the scaled matrices
Bt2 = diag(sqrt(tau)) B2 diag(sqrt(tau)) and Bt = Bt2 + Bt2^T, whose
extreme eigenvalues admit mesh-independent bounds (21/40 below for Bt,
53/5 above for Bt2^T Bt2) whenever all ratios satisfy S1.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .mesh import R_SUP, TimeMesh


@dataclass
class BDF2Coeffs:
    """Leading/trailing kernels, stored 0-indexed: b0[n-1], b1[n-1] (b1[0] = 0)."""

    b0: np.ndarray
    b1: np.ndarray


def bdf2_coeffs(mesh: TimeMesh) -> BDF2Coeffs:
    tau = mesh.steps
    r = mesh.ratios
    b0 = (1.0 + 2.0 * r) / (tau * (1.0 + r))
    b1 = -(r * r) / (tau * (1.0 + r))
    return BDF2Coeffs(b0, b1)


@dataclass
class DOCKernels:
    """Triangular kernel table; rows[n-1][j-1] = theta_{n-j}^(n) for 1 <= j <= n."""

    rows: list[np.ndarray]

    @property
    def N(self) -> int:
        return len(self.rows)

    def row_sums(self) -> np.ndarray:
        return np.array([row.sum() for row in self.rows])


def doc_kernels(mesh: TimeMesh) -> DOCKernels:
    """Closed-form product construction of the DOC kernels."""
    c = bdf2_coeffs(mesh)
    r = mesh.ratios
    # g[i] = r_{i+1}^2 / (1 + 2 r_{i+1}) for i = 1..N-1 (0-indexed i)
    g = (r[1:] ** 2) / (1.0 + 2.0 * r[1:]) if mesh.N > 1 else np.array([])
    inv_b0 = 1.0 / c.b0
    rows = []
    for n in range(1, mesh.N + 1):
        # theta_{n-j}^(n) = inv_b0[j-1] * prod(g[j..n-1])  (g index 0-based)
        suffix = np.ones(n)
        if n > 1:
            suffix[:-1] = np.cumprod(g[:n - 1][::-1])[::-1]
        rows.append(inv_b0[:n] * suffix)
    return DOCKernels(rows)


def doc_kernels_recursive(mesh: TimeMesh) -> DOCKernels:
    """Defining recursion; cross-check for the product construction."""
    c = bdf2_coeffs(mesh)
    rows: list[np.ndarray] = []
    for n in range(1, mesh.N + 1):
        row = np.zeros(n)
        row[n - 1] = 1.0 / c.b0[n - 1]  # theta_0^(n), j = n
        for j in range(n - 1, 0, -1):
            # theta_{n-j}^(n) = -(1/b0^(j)) sum_{m=j+1..n} theta_{n-m}^(n) b_{m-j}^(m)
            # only m = j+1 contributes (two-step kernels)
            row[j - 1] = -(row[j] * c.b1[j]) / c.b0[j - 1]
        rows.append(row)
    return DOCKernels(rows)


def verify_orthogonality(mesh: TimeMesh) -> float:
    """Max residual of sum_{j=k..n} theta_{n-j}^(n) b_{j-k}^(j) - delta_{nk}."""
    c = bdf2_coeffs(mesh)
    doc = doc_kernels(mesh)
    worst = 0.0
    for n in range(1, mesh.N + 1):
        row = doc.rows[n - 1]
        for k in range(1, n + 1):
            s = row[k - 1] * c.b0[k - 1]
            if k + 1 <= n:
                s += row[k] * c.b1[k]
            target = 1.0 if k == n else 0.0
            worst = max(worst, abs(s - target))
    return worst


def apply_d2(mesh: TimeMesh, v: np.ndarray) -> np.ndarray:
    """Two-step difference operator applied to a sequence v[0..N]."""
    if v.shape[0] != mesh.N + 1:
        raise ValueError(f"sequence length {v.shape[0]} != N+1 = {mesh.N + 1}")
    c = bdf2_coeffs(mesh)
    d = np.diff(v, axis=0)
    if v.ndim == 1:
        out = c.b0 * d
        out[1:] += c.b1[1:] * d[:-1]
    else:
        out = c.b0[:, None] * d
        out[1:] += c.b1[1:, None] * d[:-1]
    return out


def verify_telescope(mesh: TimeMesh, v: np.ndarray) -> float:
    """Max residual of sum_j theta_{n-j}^(n) D2 v^j - (v^n - v^{n-1})."""
    v = np.asarray(v, dtype=np.float64)
    d2 = apply_d2(mesh, v)
    doc = doc_kernels(mesh)
    worst = 0.0
    for n in range(1, mesh.N + 1):
        s = float(doc.rows[n - 1] @ d2[:n])
        worst = max(worst, abs(s - (v[n] - v[n - 1])))
    return worst


@dataclass
class KernelMatrices:
    B2: np.ndarray
    Theta2: np.ndarray
    B2t: np.ndarray  # sqrt-step scaled bidiagonal
    Bt: np.ndarray   # symmetric tridiagonal B2t + B2t^T


def kernel_matrices(mesh: TimeMesh) -> KernelMatrices:
    c = bdf2_coeffs(mesh)
    N = mesh.N
    B2 = np.diag(c.b0)
    for n in range(2, N + 1):
        B2[n - 1, n - 2] = c.b1[n - 1]
    doc = doc_kernels(mesh)
    Theta2 = np.zeros((N, N))
    for n in range(1, N + 1):
        Theta2[n - 1, :n] = doc.rows[n - 1]
    lam = np.sqrt(mesh.steps)
    B2t = lam[:, None] * B2 * lam[None, :]
    return KernelMatrices(B2, Theta2, B2t, B2t + B2t.T)


def scaled_tridiagonals(mesh: TimeMesh) -> tuple[np.ndarray, np.ndarray]:
    """Diagonal/subdiagonal kernels of the sqrt-step scaled bidiagonal matrix.

    Returns (tb0, tb1) with tb0_k = (1+2r_k)/(1+r_k) and
    tb1_k = -r_k^{3/2}/(1+r_k); tb1_1 = 0 by the r_1 = 0 convention.
    """
    r = mesh.ratios
    tb0 = (1.0 + 2.0 * r) / (1.0 + r)
    tb1 = -(r**1.5) / (1.0 + r)
    return tb0, tb1


def _sturm_count(d: np.ndarray, e: np.ndarray, x: float) -> int:
    """Number of eigenvalues of the symmetric tridiagonal (d, e) below x."""
    count = 0
    q = d[0] - x
    if q < 0:
        count += 1
    for i in range(1, d.size):
        if q == 0.0:
            q = 1e-300
        q = d[i] - x - e[i - 1] * e[i - 1] / q
        if q < 0:
            count += 1
    return count


def tridiag_extreme_eig(d: np.ndarray, e: np.ndarray, which: str,
                        tol: float = 1e-10) -> float:
    """Extreme eigenvalue of a symmetric tridiagonal matrix by bisection.

    Brackets come from Gershgorin disks; ``which`` is 'min' or 'max'.
    """
    d = np.asarray(d, dtype=np.float64)
    e = np.asarray(e, dtype=np.float64)
    n = d.size
    radius = np.zeros(n)
    if n > 1:
        radius[:-1] += np.abs(e)
        radius[1:] += np.abs(e)
    lo = float(np.min(d - radius))
    hi = float(np.max(d + radius))
    if which == "min":
        pred = lambda x: _sturm_count(d, e, x) >= 1
    elif which == "max":
        pred = lambda x: _sturm_count(d, e, x) >= n
    else:
        raise ValueError("which must be 'min' or 'max'")
    # invariant: pred(hi + eps) true, pred(lo) false
    lo -= tol
    hi += tol
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if pred(mid):
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


class EigenBounds(NamedTuple):
    lam_min: float      # smallest eigenvalue of Bt
    lam_max: float      # largest eigenvalue of B2t^T B2t
    quad_const: float   # lam_max / lam_min^2
    s1_ok: bool


def eigen_bounds(mesh: TimeMesh, tol: float = 1e-10) -> EigenBounds:
    """Extreme eigenvalues of the scaled certificate matrices and their ratio."""
    tb0, tb1 = scaled_tridiagonals(mesh)
    N = mesh.N
    # Bt: diag 2*tb0_k, offdiag tb1_{k+1}
    d_bt = 2.0 * tb0
    e_bt = tb1[1:]
    lam_min = tridiag_extreme_eig(d_bt, e_bt, "min", tol)
    # B2t^T B2t: diag tb0_k^2 + tb1_{k+1}^2, offdiag tb0_{k+1} * tb1_{k+1}
    d_p = tb0**2
    d_p[:-1] += tb1[1:] ** 2
    e_p = tb0[1:] * tb1[1:] if N > 1 else np.array([])
    lam_max = tridiag_extreme_eig(d_p, e_p, "max", tol)
    quad_const = lam_max / lam_min**2
    return EigenBounds(lam_min, lam_max, quad_const, mesh.satisfies_s1())


def min_eig_bound(z: float, s: float) -> float:
    """Gershgorin lower-bound function (2 + 4z - z^{3/2})/(1+z) - s^{3/2}/(1+s)."""
    if not (0 <= z < R_SUP and 0 <= s < R_SUP):
        raise ValueError(f"arguments must lie in [0, {R_SUP:.4f})")
    return (2.0 + 4.0 * z - z**1.5) / (1.0 + z) - s**1.5 / (1.0 + s)


def max_eig_bound(z: float, s: float) -> float:
    """Gershgorin upper-bound function for the scaled normal matrix."""
    if not (0 <= z < R_SUP and 0 <= s < R_SUP):
        raise ValueError(f"arguments must lie in [0, {R_SUP:.4f})")
    return ((1.0 + 2.0 * z) * (1.0 + 2.0 * z + z**1.5) / (1.0 + z) ** 2
            + s**1.5 * (1.0 + 2.0 * s + s**1.5) / (1.0 + s) ** 2)


def refined_quad_const(max_ratio: float, next_ratio_cap: float | None = None) -> float:
    """Case-based practical ceiling for the convolution-inequality constant."""
    if max_ratio <= np.sqrt(3.0) - 1.0:
        return 1.19
    if max_ratio <= 2.0:
        return 3.25
    if next_ratio_cap is not None and next_ratio_cap <= 1.45:
        return 3.94
    return 4.0


def quad_form_b(mesh: TimeMesh, w: np.ndarray) -> float:
    """2 sum_k w_k sum_j b_{k-j}^(k) w_j (lower bidiagonal convolution form)."""
    c = bdf2_coeffs(mesh)
    w = np.asarray(w, dtype=np.float64)
    conv = c.b0 * w
    conv[1:] += c.b1[1:] * w[:-1]
    return 2.0 * float(w @ conv)


def quad_form_theta(mesh: TimeMesh, v: np.ndarray, doc: DOCKernels | None = None) -> float:
    """2 sum_k v_k sum_j theta_{k-j}^(k) v_j."""
    if doc is None:
        doc = doc_kernels(mesh)
    v = np.asarray(v, dtype=np.float64)
    return 2.0 * float(sum(v[k] * (doc.rows[k] @ v[:k + 1]) for k in range(mesh.N)))


def cross_form_theta(mesh: TimeMesh, w: np.ndarray, v: np.ndarray,
                     doc: DOCKernels | None = None) -> float:
    """sum_k sum_j theta_{k-j}^(k) w_k v_j."""
    if doc is None:
        doc = doc_kernels(mesh)
    w = np.asarray(w, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    return float(sum(w[k] * (doc.rows[k] @ v[:k + 1]) for k in range(mesh.N)))
