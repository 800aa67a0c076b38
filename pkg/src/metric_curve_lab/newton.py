"""Damped Newton iteration for small square systems with analytic Jacobians."""
from __future__ import annotations

import numpy as np

from .errors import NoConvergence, SingularJacobian


def newton_refine(system, x0, max_iter: int = 50, tol: float = 1e-10, cond_max: float = 1e14,
                  rank_deficient: bool = False):
    """Solve ``r(x) = 0`` where ``system(x)`` returns ``(r, J)``.

    Steps are halved (at most 10 times) until the sup-norm of the residual
    decreases. Returns ``x`` with ``max|r(x)| < tol``.

    With ``rank_deficient=True`` an ill-conditioned Jacobian is not an error:
    the minimum-norm least-squares step is taken instead, which converges onto
    a solution family (e.g. the antipodal pairs of a circle).
    """
    x = np.array(x0, dtype=float).ravel()
    r, J = system(x)
    r = np.atleast_1d(np.asarray(r, dtype=float))
    J = np.atleast_2d(np.asarray(J, dtype=float))
    if J.shape != (len(r), len(x)) or len(r) != len(x):
        raise ValueError(f"system is not square: residual {r.shape}, Jacobian {J.shape}")
    norm = float(np.max(np.abs(r)))
    for _ in range(max_iter):
        if norm < tol:
            return x
        if not np.all(np.isfinite(J)):
            raise SingularJacobian("non-finite Jacobian")
        if np.linalg.cond(J) > cond_max:
            if not rank_deficient:
                raise SingularJacobian("Jacobian condition estimate exceeds limit")
            step = np.linalg.lstsq(J, -r, rcond=1e-10)[0]
        else:
            step = np.linalg.solve(J, -r)
        lam = 1.0
        for _ in range(11):
            xn = x + lam * step
            rn, Jn = system(xn)
            rn = np.atleast_1d(np.asarray(rn, dtype=float))
            nn = float(np.max(np.abs(rn)))
            if np.isfinite(nn) and nn < norm:
                break
            lam *= 0.5
        else:
            raise NoConvergence(f"residual stalled at {norm:.3g}")
        x, r, J, norm = xn, rn, np.atleast_2d(np.asarray(Jn, dtype=float)), nn
    if norm < tol:
        return x
    raise NoConvergence(f"no convergence after {max_iter} iterations (residual {norm:.3g})")
