"""Critical-point machinery for the cyclic chord-length sum.

For bounce parameters s_0..s_{tau-1} with points P_i on the boundary, write
L = sum_i |P_{i+1} - P_i| (indices mod tau).  Periodic orbits are exactly the
critical points of L.  The gradient and the cyclic tridiagonal Hessian are
assembled per chord:

    dL/ds_i          = t_i . (u_in - u_out)
    d2L/ds_x^2      += (1 - (t_x . u)^2)/l + kappa_x (n_x . u_hat_x)
    d2L/ds_a ds_b   += -(t_a . t_b - (u . t_a)(u . t_b))/l

with u the unit chord a->b, u_hat_x the unit chord pointing toward endpoint
x, n_x the inward normal, and kappa the signed curvature.  Before any Hessian
leaves this module the closed forms are checked once against central finite
differences on a bundled curved table; a failure aborts rather than returning
unverified second-order data.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidConfiguration, NotCritical
from .geometry import rot90
from .phase import CORNER_GUARD, T_MIN
from .table import perturb_curvature, transfer_params, CurvatureBump

TOL_DET = 1e-8            # on the row-norm balanced determinant
RESIDUAL_FOR_HESSIAN = 1e-8


@dataclass(eq=False)
class BounceConfiguration:
    params: np.ndarray

    def __post_init__(self):
        self.params = np.asarray(self.params, float) % 1.0
        if self.params.ndim != 1 or len(self.params) < 2:
            raise InvalidConfiguration("need at least two bounce parameters")

    @property
    def tau(self):
        return len(self.params)


@dataclass(eq=False)
class HessianData:
    matrix: np.ndarray
    diag: np.ndarray        # a_i
    offdiag: np.ndarray     # b_i couples bounces i and i+1 (mod tau)
    params: np.ndarray


@dataclass(eq=False)
class NondegeneracyReport:
    nondegenerate: bool
    balanced_det: float
    raw_det: float
    index: int              # number of negative eigenvalues
    tol: float


def _as_config(config):
    if isinstance(config, BounceConfiguration):
        return config
    return BounceConfiguration(np.asarray(config, float))


def _validate(table, config):
    s = config.params
    if np.any(table.corner_distance(s) <= CORNER_GUARD):
        raise InvalidConfiguration("bounce parameter inside the corner guard")
    pts = table.point(s)
    chords = np.roll(pts, -1, axis=0) - pts
    ell = np.linalg.norm(chords, axis=1)
    if np.any(ell < T_MIN):
        raise InvalidConfiguration("consecutive bounce points coincide")
    return pts, chords, ell


def length_functional(table, config):
    config = _as_config(config)
    _, _, ell = _validate(table, config)
    return float(np.sum(ell))


def length_gradient(table, config):
    config = _as_config(config)
    pts, chords, ell = _validate(table, config)
    u = chords / ell[:, None]                  # u[i] points from i to i+1
    tan = table.tangent(config.params)
    return np.einsum("ij,ij->i", tan, np.roll(u, 1, axis=0) - u)


def _hessian_matrix(table, config):
    """Hessian entries at an arbitrary admissible configuration."""
    config = _as_config(config)
    pts, chords, ell = _validate(table, config)
    tau = config.tau
    s = config.params
    tan = table.tangent(s)
    n_in = rot90(tan)
    kap = np.atleast_1d(table.curvature(s))
    u = chords / ell[:, None]

    h = np.zeros((tau, tau))
    diag = np.zeros(tau)
    off = np.zeros(tau)
    for i in range(tau):
        j = (i + 1) % tau
        ui = u[i]
        li = ell[i]
        ta, tb = tan[i], tan[j]
        # endpoint terms (u_hat points toward the endpoint being varied)
        a_term = (1.0 - np.dot(ta, ui) ** 2) / li + kap[i] * np.dot(n_in[i], -ui)
        b_term = (1.0 - np.dot(tb, ui) ** 2) / li + kap[j] * np.dot(n_in[j], ui)
        mixed = -(np.dot(ta, tb) - np.dot(ui, ta) * np.dot(ui, tb)) / li
        h[i, i] += a_term
        h[j, j] += b_term
        h[i, j] += mixed
        h[j, i] += mixed
        off[i] = mixed
    diag[:] = np.diag(h)
    return h, diag, off


_FD_GATE_DONE = False


def _fd_gate():
    """One-time self-check of the closed forms against finite differences on
    a curved table (an off-axis trig oval).  Runs before the first Hessian is
    released; failure is a hard error."""
    global _FD_GATE_DONE
    if _FD_GATE_DONE:
        return
    from .table import build_smooth_curve
    th = 2.0 * np.pi * np.arange(16) / 16
    pts = np.stack([1.3 * np.cos(th) + 0.08 * np.cos(2 * th),
                    0.9 * np.sin(th) + 0.05 * np.sin(3 * th)], axis=1)
    table = build_smooth_curve(pts)
    for params in ([0.07, 0.36, 0.71], [0.11, 0.32, 0.55, 0.83]):
        config = BounceConfiguration(np.array(params))
        grad = length_gradient(table, config)
        hess, _, _ = _hessian_matrix(table, config)
        tau = config.tau
        eps = 1e-6
        fd_grad = np.zeros(tau)
        fd_hess = np.zeros((tau, tau))
        for k in range(tau):
            for sgn, acc in ((1.0, 1.0), (-1.0, -1.0)):
                shifted = config.params.copy()
                shifted[k] += sgn * eps
                fd_grad[k] += acc * length_functional(table, shifted)
                fd_hess[:, k] += acc * length_gradient(table, shifted)
        fd_grad /= 2.0 * eps
        fd_hess /= 2.0 * eps
        if np.max(np.abs(fd_grad - grad)) > 1e-6 * max(1.0, np.max(np.abs(grad))):
            raise AssertionError("gradient closed form failed its "
                                 "finite-difference self-check")
        if np.max(np.abs(fd_hess - hess)) > 1e-5 * np.max(np.abs(hess)):
            raise AssertionError("Hessian closed form failed its "
                                 "finite-difference self-check")
    _FD_GATE_DONE = True


def assemble_hessian(table, config):
    """Second-order data at a critical configuration (NotCritical above a
    residual of 1e-8)."""
    config = _as_config(config)
    _fd_gate()
    grad = length_gradient(table, config)
    res = float(np.max(np.abs(grad)))
    if res > RESIDUAL_FOR_HESSIAN:
        raise NotCritical(f"gradient residual {res:.3e} exceeds "
                          f"{RESIDUAL_FOR_HESSIAN:.0e}")
    h, diag, off = _hessian_matrix(table, config)
    return HessianData(matrix=h, diag=diag, offdiag=off,
                       params=config.params.copy())


def check_nondegeneracy(hess, tol=TOL_DET):
    """Row-norm balanced determinant test plus the Morse index."""
    m = np.asarray(hess.matrix if isinstance(hess, HessianData) else hess,
                   float)
    scale = np.max(np.abs(m), axis=1)
    scale = np.where(scale > 0.0, scale, 1.0)
    d = 1.0 / np.sqrt(scale)
    balanced = m * d[:, None] * d[None, :]
    bdet = float(np.linalg.det(balanced))
    eigs = np.linalg.eigvalsh(m)
    return NondegeneracyReport(nondegenerate=abs(bdet) > tol,
                               balanced_det=bdet,
                               raw_det=float(np.linalg.det(m)),
                               index=int(np.sum(eigs < 0.0)),
                               tol=tol)


@dataclass(eq=False)
class SensitivityRecord:
    amplitude: float
    kappa: float            # boundary curvature at the bumped bounce point,
                            # pulled back to the base frame
    params: np.ndarray      # configuration carried onto the perturbed table
    diag: np.ndarray        # Hessian diagonal, pulled back to the base frame
    offdiag: np.ndarray     # chord couplings, same frame
    homothety_ratio: float


def curvature_sensitivity(table, config, bounce_index, amplitudes,
                          halfwidth=0.01):
    """Hessian entries under a curvature bump centered at one bounce.

    For each amplitude, the table is perturbed by a bump at the chosen bounce
    parameter, the configuration is carried over by closest-point transfer,
    and the Hessian entries are evaluated there.  Entries are multiplied by
    the renormalization homothety so they are comparable across amplitudes in
    the unperturbed frame (entries scale like 1/length)."""
    config = _as_config(config)
    _fd_gate()
    i = int(bounce_index)
    if not 0 <= i < config.tau:
        raise InvalidConfiguration("bounce index out of range")
    center = float(config.params[i])
    records = []
    for amp in amplitudes:
        bump = CurvatureBump(center=center, halfwidth=float(halfwidth),
                             amplitude=float(amp))
        pert = perturb_curvature(table, bump)
        moved = transfer_params(table, pert, config.params)
        _, diag, off = _hessian_matrix(pert, BounceConfiguration(moved))
        lam = bump.homothety_ratio
        # curvature transforms like the entries (1/length) under the
        # renormalization homothety
        kap = float(pert.curvature(float(moved[i]))) * lam
        records.append(SensitivityRecord(amplitude=float(amp), kappa=kap,
                                         params=moved,
                                         diag=diag * lam, offdiag=off * lam,
                                         homothety_ratio=lam))
    return records
