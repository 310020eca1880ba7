"""Feasible-start interior-point solver for linear matrix inequalities.

Solves

    minimize    c . y
    subject to  S(y) = F0 + sum_j y_j F_j  >=  0   (positive semidefinite)

given strictly feasible primal and dual starting points, using Mehrotra
predictor-corrector steps in the Nesterov-Todd scaling. The Lagrangian dual is

    maximize   -Tr[F0 Z]
    subject to  Tr[F_j Z] = c_j,   Z >= 0,

and the duality gap of a feasible pair is Tr[Z S(y)] >= 0.

All data is real symmetric; callers with complex Hermitian constraints pass
the real embedding [[Re, -Im], [Im, Re]] and halve the resulting values.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .constants import (
    SDP_FEAS_TOL,
    SDP_GAP_TOL,
    SDP_MAX_ITER,
    SDP_STEP_FRACTION,
)
from .linalg import ConvergenceError


@dataclass(frozen=True)
class SdpResult:
    """Converged primal-dual pair for an LMI-constrained linear program."""

    y: np.ndarray
    primal: float
    dual: float
    gap: float
    rel_gap: float
    iterations: int
    S: np.ndarray
    Z: np.ndarray
    primal_residual: float
    dual_residual: float


def _sym(a: np.ndarray) -> np.ndarray:
    return 0.5 * (a + a.T)


def _spd_sqrt_pair(a: np.ndarray, what: str) -> tuple[np.ndarray, np.ndarray]:
    """Return (a^{1/2}, a^{-1/2}) for symmetric positive definite a."""
    vals, vecs = np.linalg.eigh(a)
    if vals[0] <= 0.0:
        raise ConvergenceError(f"{what} lost positive definiteness")
    root = np.sqrt(vals)
    return (vecs * root) @ vecs.T, (vecs / root) @ vecs.T


def _nt_scaling(S: np.ndarray, Z: np.ndarray):
    """Nesterov-Todd scaling point: T with T Z T = T^-1 S T^-1 = lam."""
    zhalf, zihalf = _spd_sqrt_pair(Z, "dual iterate")
    inner = _sym(zhalf @ S @ zhalf)
    ivals, ivecs = np.linalg.eigh(inner)
    if ivals[0] <= 0.0:
        raise ConvergenceError("primal iterate lost positive definiteness")
    inner_half = (ivecs * np.sqrt(ivals)) @ ivecs.T
    W = _sym(zihalf @ inner_half @ zihalf)
    T, Tinv = _spd_sqrt_pair(W, "scaling point")
    lam = _sym(T @ Z @ T)
    return T, Tinv, lam


def _lyap_solve(levals: np.ndarray, levecs: np.ndarray, G: np.ndarray) -> np.ndarray:
    """Solve (lam V + V lam)/2 = G for V, in the eigenbasis of lam."""
    Gt = levecs.T @ G @ levecs
    denom = 0.5 * (levals[:, None] + levals[None, :])
    return levecs @ (Gt / denom) @ levecs.T


def _max_step(lam_ihalf: np.ndarray, dlam: np.ndarray) -> float:
    """Largest alpha with lam + alpha dlam >= 0."""
    B = _sym(lam_ihalf @ dlam @ lam_ihalf)
    beta = np.linalg.eigvalsh(B)[0]
    if beta >= -1e-14:
        return np.inf
    return -1.0 / beta


def _solve_gram(M: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    try:
        sol = np.linalg.solve(M, rhs)
        if np.all(np.isfinite(sol)):
            return sol
    except np.linalg.LinAlgError:
        pass
    jitter = 1e-12 * (np.trace(M) / M.shape[0] + 1.0)
    return np.linalg.solve(M + jitter * np.eye(M.shape[0]), rhs)


def solve_lmi(
    c: np.ndarray,
    F0: np.ndarray,
    Fs: np.ndarray,
    y0: np.ndarray,
    Z0: np.ndarray,
    gap_tol: float = SDP_GAP_TOL,
    feas_tol: float = SDP_FEAS_TOL,
    max_iter: int = SDP_MAX_ITER,
    step_fraction: float = SDP_STEP_FRACTION,
) -> SdpResult:
    """Minimize c . y subject to F0 + sum_j y_j F_j being PSD.

    y0 must give a strictly positive definite S(y0) and Z0 must be strictly
    positive definite and (near-)feasible for the dual equality constraints;
    small dual infeasibility is folded into the Newton right-hand side and
    decays with the step length. Raises ConvergenceError if the relative gap
    and residuals fail to reach tolerance within max_iter iterations.
    """
    c = np.asarray(c, dtype=float)
    Fs = np.asarray(Fs, dtype=float)
    m = c.size
    n = F0.shape[0]
    if Fs.shape != (m, n, n):
        raise ValueError(f"constraint stack shape {Fs.shape} != ({m}, {n}, {n})")

    y = np.asarray(y0, dtype=float).copy()
    S = _sym(F0 + np.tensordot(y, Fs, axes=(0, 0)))
    Z = _sym(np.asarray(Z0, dtype=float))
    if np.linalg.eigvalsh(S)[0] <= 0.0:
        raise ValueError("primal start is not strictly feasible")
    if np.linalg.eigvalsh(Z)[0] <= 0.0:
        raise ValueError("dual start is not positive definite")

    A = Fs.reshape(m, n * n)
    cscale = 1.0 + np.abs(c).max()
    eye = np.eye(n)

    iterations = 0
    for iterations in range(1, max_iter + 1):
        rp = _sym(F0 + np.tensordot(y, Fs, axes=(0, 0)) - S)
        rd = c - A @ Z.ravel()
        gap = float(np.sum(Z * S))
        primal = float(c @ y)
        dual = float(-np.sum(F0 * Z))
        rel_gap = abs(gap) / (1.0 + abs(primal) + abs(dual))
        rp_inf = float(np.abs(rp).max())
        rd_inf = float(np.abs(rd).max()) / cscale
        if rel_gap < gap_tol and rp_inf < feas_tol and rd_inf < feas_tol:
            return SdpResult(
                y=y, primal=primal, dual=dual, gap=gap, rel_gap=rel_gap,
                iterations=iterations - 1, S=S, Z=Z,
                primal_residual=rp_inf, dual_residual=rd_inf,
            )

        T, Tinv, lam = _nt_scaling(S, Z)
        levals, levecs = np.linalg.eigh(lam)
        if levals[0] <= 0.0:
            raise ConvergenceError("scaled iterate lost positive definiteness")
        lam_ihalf = (levecs / np.sqrt(levals)) @ levecs.T
        mu = float(np.sum(levals * levals)) / n
        if mu <= 0.0:
            break

        Ft = np.einsum("ab,jbc,cd->jad", Tinv, Fs, Tinv, optimize=True)
        Rpt = _sym(Tinv @ rp @ Tinv)
        At = Ft.reshape(m, n * n)
        M = At @ At.T

        # predictor: target ZS -> 0; the Lyapunov solution for G = -lam^2
        # is V = -lam, no solve needed
        V = -lam
        rhs = At @ (V - Rpt).ravel() - rd
        dy_aff = _solve_gram(M, rhs)
        dlamS_aff = _sym(np.tensordot(dy_aff, Ft, axes=(0, 0)) + Rpt)
        dlamZ_aff = _sym(V - dlamS_aff)
        ap_aff = min(1.0, _max_step(lam_ihalf, dlamS_aff))
        ad_aff = min(1.0, _max_step(lam_ihalf, dlamZ_aff))
        lam_s = lam + ap_aff * dlamS_aff
        lam_z = lam + ad_aff * dlamZ_aff
        mu_aff = float(np.sum(lam_z * lam_s)) / n
        sigma = min(1.0, max(0.0, (mu_aff / mu) ** 3))

        # corrector with Mehrotra second-order term
        G = _sym(
            sigma * mu * eye
            - lam @ lam
            - 0.5 * (dlamS_aff @ dlamZ_aff + dlamZ_aff @ dlamS_aff)
        )
        V = _lyap_solve(levals, levecs, G)
        rhs = At @ (V - Rpt).ravel() - rd
        dy = _solve_gram(M, rhs)
        dlamS = _sym(np.tensordot(dy, Ft, axes=(0, 0)) + Rpt)
        dlamZ = _sym(V - dlamS)
        ap = min(1.0, step_fraction * _max_step(lam_ihalf, dlamS))
        ad = min(1.0, step_fraction * _max_step(lam_ihalf, dlamZ))
        if ap < 1e-13 and ad < 1e-13:
            raise ConvergenceError(
                f"step lengths collapsed at iteration {iterations}, "
                f"relative gap {rel_gap:.3e}"
            )

        y = y + ap * dy
        S = _sym(S + ap * (T @ dlamS @ T))
        Z = _sym(Z + ad * (Tinv @ dlamZ @ Tinv))

    raise ConvergenceError(
        f"no convergence in {iterations} iterations: primal {primal:.12g}, "
        f"dual {dual:.12g}, relative gap {rel_gap:.3e}, "
        f"residuals {rp_inf:.3e}/{rd_inf:.3e}"
    )
