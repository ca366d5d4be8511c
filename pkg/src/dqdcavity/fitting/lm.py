"""Damped least squares (Levenberg-Marquardt) with box bounds.

Parameters are internally rescaled by a typical magnitude so that the
additive damping term treats them evenly; bounds are enforced by
projecting each trial step. Parameters with lower == upper are held fixed.
"""

from dataclasses import dataclass, field
import logging

import numpy as np

log = logging.getLogger(__name__)


class FitError(RuntimeError):
    """Fit could not be carried out; ``diagnostics`` says why."""

    def __init__(self, msg, **diagnostics):
        super().__init__(msg)
        self.diagnostics = diagnostics


@dataclass
class FitOptions:
    max_iter: int = 200
    gtol: float = 1e-10
    xtol: float = 1e-12
    fd_rel_step: float = 1e-6
    fd_abs_step: float = 1e-12
    nu: float = 2.0
    lambda0: float = 1e-3
    lambda_min: float = 1e-15
    lambda_max: float = 1e15


@dataclass
class FitProblem:
    """model(params, x) -> real array, fitted to ``y`` sampled at ``x``."""

    model: object
    x: np.ndarray
    y: np.ndarray
    p0: np.ndarray
    lower: np.ndarray = None
    upper: np.ndarray = None
    names: list = None
    scale: np.ndarray = None
    options: FitOptions = field(default_factory=FitOptions)

    def __post_init__(self):
        self.x = np.asarray(self.x, float)
        self.y = np.asarray(self.y, float)
        self.p0 = np.asarray(self.p0, float)
        n = len(self.p0)
        self.lower = np.full(n, -np.inf) if self.lower is None else np.asarray(self.lower, float)
        self.upper = np.full(n, np.inf) if self.upper is None else np.asarray(self.upper, float)
        if self.names is None:
            self.names = [f"p{i}" for i in range(n)]
        if self.scale is None:
            self.scale = np.where(self.p0 != 0, np.abs(self.p0), 1.0)
        self.scale = np.asarray(self.scale, float)
        if self.scale.shape != self.p0.shape or np.any(self.scale <= 0):
            raise FitError("scale must be positive, one entry per parameter")
        if len(self.y) < n:
            raise FitError(f"{len(self.y)} data points cannot determine {n} parameters")
        if np.any(self.lower > self.upper):
            raise FitError("lower bound above upper bound")
        if np.any(self.p0 < self.lower) or np.any(self.p0 > self.upper):
            raise FitError("initial point outside bounds",
                           p0=dict(zip(self.names, self.p0)))


@dataclass
class FitResult:
    params: dict
    stderr: dict
    rss: float
    rss_initial: float
    converged: bool
    iterations: int
    reason: str
    at_bound: list = field(default_factory=list)
    lam: float = 0.0
    history: list = field(default_factory=list)
    covariance: np.ndarray = None

    def to_dict(self):
        return {"params": self.params, "stderr": self.stderr, "rss": self.rss,
                "converged": self.converged, "iters": self.iterations,
                "reason": self.reason, "at_bound": self.at_bound}

    def __getitem__(self, name):
        return self.params[name]


def _residuals(prob, p):
    r = np.asarray(prob.model(p, prob.x), float) - prob.y
    if r.shape != prob.y.shape:
        raise FitError(f"model returned shape {r.shape}, data has {prob.y.shape}")
    if not np.all(np.isfinite(r)):
        raise FitError("model produced non-finite output",
                       params=dict(zip(prob.names, p.tolist())))
    return r


def jacobian(prob, p, free):
    """Central-difference Jacobian w.r.t. the free parameters (natural units)."""
    opt = prob.options
    cols = []
    for j in np.flatnonzero(free):
        h = max(opt.fd_rel_step * abs(p[j]), opt.fd_abs_step)
        hi = p.copy()
        lo = p.copy()
        hi[j] = min(p[j] + h, prob.upper[j])
        lo[j] = max(p[j] - h, prob.lower[j])
        cols.append((_residuals(prob, hi) - _residuals(prob, lo)) / (hi[j] - lo[j]))
    return np.column_stack(cols)


def _covariance(J, rss, dof, rcond=1e-13):
    """s^2 (J^T J)^-1, with infinite variance along unresolved directions."""
    n = J.shape[1]
    JtJ = J.T @ J
    s2 = rss / dof if dof > 0 else np.nan
    w, V = np.linalg.eigh(JtJ)
    wmax = w.max() if len(w) and w.max() > 0 else 0.0
    good = w > rcond * wmax if wmax > 0 else np.zeros(n, bool)
    inv_w = np.zeros_like(w)
    inv_w[good] = 1.0 / w[good]
    cov = (V * inv_w) @ V.T * s2
    bad = ~good
    if bad.any():
        # parameters with weight in a null direction cannot be determined
        involved = np.abs(V[:, bad]).max(axis=1) > 1e-6
        cov[involved, :] = np.inf
        cov[:, involved] = np.inf
    return cov


def levenberg_marquardt(prob):
    """Minimise sum((model - y)^2) over the box. Returns a FitResult."""
    opt = prob.options
    free = prob.lower < prob.upper
    nfree = int(free.sum())
    S = prob.scale[free]
    p = np.clip(prob.p0.copy(), prob.lower, prob.upper)

    r = _residuals(prob, p)
    rss0 = rss = float(r @ r)
    history = [rss]
    if nfree == 0:
        return _finish(prob, p, r, rss0, True, 0, "no free parameters", 0.0, history, free)

    J = jacobian(prob, p, free) * S          # Jacobian in scaled coordinates
    A = J.T @ J
    g = J.T @ r
    lam = float(np.clip(opt.lambda0 * max(np.max(np.diag(A)), 1e-300),
                        opt.lambda_min, opt.lambda_max))
    reason = "max_iter reached"
    converged = False
    it = 0
    while it < opt.max_iter:
        it += 1
        if rss == 0.0 or _gradient_small(J, r, opt.gtol):
            converged, reason = True, "gradient tolerance"
            break
        try:
            step = np.linalg.solve(A + lam * np.eye(nfree), -g)
        except np.linalg.LinAlgError:
            raise FitError("singular damped normal matrix", lam=lam,
                           params=dict(zip(prob.names, p.tolist()))) from None
        trial = p.copy()
        trial[free] = np.clip(p[free] + step * S, prob.lower[free], prob.upper[free])
        du = (trial[free] - p[free]) / S
        r_new = _residuals(prob, trial)
        rss_new = float(r_new @ r_new)
        if rss_new < rss:
            small_step = np.linalg.norm(du) <= opt.xtol * (np.linalg.norm(p[free] / S) + opt.xtol)
            p, r, rss = trial, r_new, rss_new
            history.append(rss)
            lam = max(lam / opt.nu, opt.lambda_min)
            if small_step:
                converged, reason = True, "step tolerance"
                break
            J = jacobian(prob, p, free) * S
            A = J.T @ J
            g = J.T @ r
        else:
            if np.linalg.norm(du) <= opt.xtol * (np.linalg.norm(p[free] / S) + opt.xtol):
                converged, reason = True, "step tolerance"
                break
            if lam >= opt.lambda_max:
                reason = "damping at lambda_max without progress"
                break
            lam = min(lam * opt.nu, opt.lambda_max)
    return _finish(prob, p, r, rss0, converged, it, reason, lam, history, free)


def _gradient_small(J, r, gtol):
    rn = np.linalg.norm(r)
    cn = np.linalg.norm(J, axis=0)
    with np.errstate(invalid="ignore", divide="ignore"):
        cos = np.abs(J.T @ r) / (cn * rn)
    cos = np.where(cn > 0, cos, 0.0)
    return bool(np.all(cos <= gtol))


def _finish(prob, p, r, rss0, converged, it, reason, lam, history, free):
    rss = float(r @ r)
    names = prob.names
    stderr = {n: 0.0 for n in names}
    cov = np.zeros((len(p), len(p)))
    if free.any():
        S = prob.scale[free]
        dof = len(r) - int(free.sum())
        cov_free = _covariance(jacobian(prob, p, free) * S, rss, dof) * np.outer(S, S)
        idx = np.flatnonzero(free)
        cov[np.ix_(idx, idx)] = cov_free
        for k, j in enumerate(idx):
            stderr[names[j]] = float(np.sqrt(cov_free[k, k]))
    at_bound = [names[j] for j in np.flatnonzero(free)
                if p[j] <= prob.lower[j] or p[j] >= prob.upper[j]]
    if not converged:
        log.warning("fit did not converge: %s (rss %.3e after %d iterations)",
                    reason, rss, it)
    return FitResult(dict(zip(names, p.tolist())), stderr, rss, rss0, converged, it,
                     reason, at_bound, lam, history, cov)
