"""Levenberg-Marquardt with Marquardt diagonal scaling and Nielsen damping."""

from dataclasses import dataclass, field

import numpy as np


@dataclass
class LMResult:
    x: np.ndarray
    cost: float
    iterations: int
    converged: bool
    message: str
    history: list = field(default_factory=list)


def levenberg_marquardt(fun, jac, x0, max_iter=200, tol=1e-10, tau=1.0):
    """Minimize ``0.5 * |fun(x)|^2``.

    Parameters
    ----------
    fun : callable
        Residual vector ``r(x)``.
    jac : callable
        Jacobian ``dr/dx`` with shape ``(len(r), len(x))``.
    x0 : array_like
    max_iter : int
        Cap on the number of trial steps (accepted or rejected).
    tol : float
        Stops when the relative cost decrease of an accepted step, the
        relative step length or the scaled gradient falls below ``tol``.
    tau : float
        Initial damping; the damping matrix is ``mu * diag(J^T J)``.

    Returns
    -------
    LMResult
        ``history`` holds the cost after every accepted step, starting with
        the initial cost; it is nonincreasing by construction.
    """
    x = np.array(x0, dtype=float)
    r = fun(x)
    if not np.all(np.isfinite(r)):
        return LMResult(x, np.inf, 0, False, "non-finite residual at start")
    cost = 0.5 * float(r @ r)
    Jm = jac(x)
    A = Jm.T @ Jm
    g = Jm.T @ r
    # the damping term is mu * diag(A), so mu itself is dimensionless
    mu = tau
    nu = 2.0
    history = [cost]

    for it in range(1, max_iter + 1):
        D = np.maximum(np.diag(A), 1e-12 * np.max(np.diag(A)) + 1e-300)
        if np.max(np.abs(g) / np.sqrt(D)) <= tol * max(np.sqrt(2 * cost), 1e-300):
            return LMResult(x, cost, it - 1, True, "gradient below tolerance", history)
        try:
            step = np.linalg.solve(A + mu * np.diag(D), -g)
        except np.linalg.LinAlgError:
            mu *= nu
            nu *= 2
            continue
        if np.linalg.norm(step) <= tol * (np.linalg.norm(x) + tol):
            return LMResult(x, cost, it, True, "step below tolerance", history)
        x_new = x + step
        r_new = fun(x_new)
        with np.errstate(over="ignore", invalid="ignore"):
            cost_new = 0.5 * float(r_new @ r_new) if np.all(np.isfinite(r_new)) else np.inf
        predicted = 0.5 * float(step @ (mu * D * step - g))
        rho = (cost - cost_new) / predicted if predicted > 0 else -1.0
        if rho > 0:
            decrease = cost - cost_new
            x, r, cost = x_new, r_new, cost_new
            history.append(cost)
            Jm = jac(x)
            A = Jm.T @ Jm
            g = Jm.T @ r
            mu *= max(1.0 / 3.0, 1.0 - (2.0 * rho - 1.0) ** 3)
            nu = 2.0
            if decrease <= tol * cost:
                return LMResult(x, cost, it, True, "cost decrease below tolerance", history)
        else:
            mu *= nu
            nu *= 2.0
            if not np.isfinite(mu) or mu > 1e300:
                return LMResult(x, cost, it, False, "damping overflow", history)
    return LMResult(x, cost, max_iter, False, "iteration limit reached", history)
