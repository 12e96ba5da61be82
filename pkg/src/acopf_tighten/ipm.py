"""Primal-dual interior-point solver for the polynomial models.

Inequalities get slacks, simple bounds get log barriers, and each Newton
step solves the symmetric indefinite KKT system with a dense LAPACK LDL^T
factorization whose inertia drives primal regularization. Convex
relaxations solved to the KKT tolerance yield global bounds; the same loop
applied to the nonconvex model yields local KKT points.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import get_lapack_funcs

from .expr import Poly
from .netmodel import Network
from .relax import EQ, GE, LE, ModelSpec, build_acopf, lift_ac_point

_SENTINEL_MULT = -1  # placeholder column meaning "multiply by 1"

_blas_pinned = False


def pin_blas_threads() -> None:
    """Limit BLAS to one thread: keeps solves deterministic and lets many
    solver instances run concurrently without oversubscription."""
    global _blas_pinned
    if _blas_pinned:
        return
    try:
        from threadpoolctl import threadpool_limits

        threadpool_limits(limits=1)
    except Exception:
        pass
    _blas_pinned = True


@dataclass
class SolveOptions:
    tol: float = 1e-6
    feas_tol: float = 1e-6
    max_iter: int = 400
    time_limit: float | None = None
    mu0: float = 0.1
    debug_merit: bool = False
    trace: object = None  # callable(dict) per iteration, for diagnostics


@dataclass
class SolveResult:
    status: str  # optimal | infeasible | iter_limit | numerical_failure
    objective: float
    primal: dict[str, float]
    max_constraint_violation: float
    iterations: int
    wall_time: float
    kkt_error: float = math.nan
    duals: dict | None = None
    merit_history: list = field(default_factory=list)

    @property
    def optimal(self) -> bool:
        return self.status == "optimal"


class _Block:
    """Vectorized evaluation data for a list of polynomials."""

    def __init__(self, polys: list[Poly], n: int):
        self.m = len(polys)
        self.n = n
        self.const = np.zeros(self.m)
        lin_r, lin_c, lin_v = [], [], []
        vr, vc, v1, v2, v3 = [], [], [], [], []
        jr, jcol, jc, jm1, jm2 = [], [], [], [], []
        hr, ha, hb, hc, hm = [], [], [], [], []
        for r, poly in enumerate(polys):
            for key, coef in poly.terms.items():
                d = len(key)
                if d == 0:
                    self.const[r] += coef
                elif d == 1:
                    lin_r.append(r)
                    lin_c.append(key[0])
                    lin_v.append(coef)
                else:
                    vr.append(r)
                    vc.append(coef)
                    pads = list(key) + [_SENTINEL_MULT] * (3 - d)
                    v1.append(pads[0])
                    v2.append(pads[1])
                    v3.append(pads[2])
                    for var, dcoef, m1, m2 in _jac_entries(key, coef):
                        jr.append(r)
                        jcol.append(var)
                        jc.append(dcoef)
                        jm1.append(m1)
                        jm2.append(m2)
                    for a, b, hcoef, m1 in _hess_entries(key, coef):
                        hr.append(r)
                        ha.append(a)
                        hb.append(b)
                        hc.append(hcoef)
                        hm.append(m1)
        import scipy.sparse as sp

        self.A = sp.csr_matrix((lin_v, (lin_r, lin_c)), shape=(self.m, n))
        self.A_dense = self.A.toarray() if self.m else np.zeros((0, n))
        self.vr = np.array(vr, dtype=np.intp)
        self.vc = np.array(vc)
        self.v1 = np.array(v1, dtype=np.intp)
        self.v2 = np.array(v2, dtype=np.intp)
        self.v3 = np.array(v3, dtype=np.intp)
        self.jr = np.array(jr, dtype=np.intp)
        self.jcol = np.array(jcol, dtype=np.intp)
        self.jc = np.array(jc)
        self.jm1 = np.array(jm1, dtype=np.intp)
        self.jm2 = np.array(jm2, dtype=np.intp)
        self.hr = np.array(hr, dtype=np.intp)
        self.ha = np.array(ha, dtype=np.intp)
        self.hb = np.array(hb, dtype=np.intp)
        self.hc = np.array(hc)
        self.hm = np.array(hm, dtype=np.intp)

    def values(self, x, x_aug):
        v = self.const + self.A @ x
        if self.vr.size:
            contrib = self.vc * x_aug[self.v1] * x_aug[self.v2] * x_aug[self.v3]
            v = v + np.bincount(self.vr, weights=contrib, minlength=self.m)
        return v

    def jacobian(self, x_aug):
        J = self.A_dense.copy()
        if self.jr.size:
            np.add.at(J, (self.jr, self.jcol), self.jc * x_aug[self.jm1] * x_aug[self.jm2])
        return J

    def add_hessian(self, x_aug, lam, H):
        if self.hr.size:
            np.add.at(H, (self.ha, self.hb), self.hc * x_aug[self.hm] * lam[self.hr])


def _jac_entries(key, coef):
    """(var, coef, m1, m2) per distinct variable of a degree>=2 monomial."""
    out = []
    uniq = sorted(set(key))
    for var in uniq:
        e = key.count(var)
        rest = list(key)
        rest.remove(var)
        pads = rest + [_SENTINEL_MULT] * (2 - len(rest))
        out.append((var, coef * e, pads[0], pads[1]))
    return out


def _hess_entries(key, coef):
    """Symmetric Hessian contributions (a, b, coef, m) of one monomial."""
    out = []
    uniq = sorted(set(key))
    for i, a in enumerate(uniq):
        ea = key.count(a)
        if ea >= 2:
            rest = list(key)
            rest.remove(a)
            rest.remove(a)
            m = rest[0] if rest else _SENTINEL_MULT
            out.append((a, a, coef * ea * (ea - 1), m))
        for b in uniq[i + 1 :]:
            eb = key.count(b)
            rest = list(key)
            rest.remove(a)
            rest.remove(b)
            m = rest[0] if rest else _SENTINEL_MULT
            out.append((a, b, coef * ea * eb, m))
            out.append((b, a, coef * ea * eb, m))
    return out


class CompiledModel:
    """A ModelSpec lowered to arrays: fixed variables folded out,
    constraints split by sense (inequalities normalized to <= 0)."""

    def __init__(self, spec: ModelSpec):
        self.spec = spec
        fixed: dict[int, float] = {}
        keep: list[int] = []
        for v in spec.variables:
            if v.ub - v.lb <= 1e-12:
                fixed[v.idx] = 0.5 * (v.lb + v.ub)
            else:
                keep.append(v.idx)
        self.fixed = fixed
        self.keep = keep
        self.remap = {old: new for new, old in enumerate(keep)}
        self.n = len(keep)
        self.lb = np.array([spec.variables[i].lb for i in keep])
        self.ub = np.array([spec.variables[i].ub for i in keep])
        self.names = [spec.variables[i].name for i in keep]

        eq_polys, ineq_polys = [], []
        self.eq_tags, self.ineq_tags = [], []
        for c in spec.constraints:
            poly = c.poly.substitute(fixed).remap(self.remap) if fixed else c.poly.remap(self.remap)
            if c.sense == EQ:
                eq_polys.append(poly)
                self.eq_tags.append(c.tag)
            elif c.sense == LE:
                ineq_polys.append(poly)
                self.ineq_tags.append(c.tag)
            else:
                ineq_polys.append(-poly)
                self.ineq_tags.append(c.tag)
        self.eq = _Block(eq_polys, self.n)
        self.ineq = _Block(ineq_polys, self.n)
        obj = spec.objective.substitute(fixed).remap(self.remap) if fixed else spec.objective.remap(self.remap)
        self.obj = _Block([obj], self.n)

    def fold_point(self, x_full) -> np.ndarray:
        return np.asarray(x_full, dtype=float)[self.keep]

    def unfold(self, x) -> np.ndarray:
        full = np.zeros(len(self.spec.variables))
        full[self.keep] = x
        for i, val in self.fixed.items():
            full[i] = val
        return full

    def bounds_vectors(self, overrides: dict[str, tuple[float, float]] | None):
        lb, ub = self.lb.copy(), self.ub.copy()
        if overrides:
            for pos, name in enumerate(self.names):
                if name in overrides:
                    olb, oub = overrides[name]
                    lb[pos] = max(lb[pos], olb)
                    ub[pos] = min(ub[pos], oub)
                    if lb[pos] > ub[pos]:
                        lb[pos] = ub[pos] = 0.5 * (lb[pos] + ub[pos])
        return lb, ub

    def objective_vector(self, poly: Poly):
        """Lower a linear objective polynomial to (c, const) in folded space."""
        p = poly.substitute(self.fixed).remap(self.remap) if self.fixed else poly.remap(self.remap)
        c = np.zeros(self.n)
        const = 0.0
        for key, coef in p.terms.items():
            if len(key) == 0:
                const += coef
            elif len(key) == 1:
                c[key[0]] += coef
            else:
                raise ValueError("objective override must be linear")
        return c, const


def _inertia(ldu, ipiv, dim, tiny=1e-14):
    pos = neg = zero = 0
    k = 0
    while k < dim:
        piv = ipiv[k]
        if piv >= 0:
            d = ldu[k, k]
            if abs(d) <= tiny:
                zero += 1
            elif d > 0:
                pos += 1
            else:
                neg += 1
            k += 1
        else:
            a, b, c = ldu[k, k], ldu[k + 1, k], ldu[k + 1, k + 1]
            det = a * c - b * b
            if det < -tiny:
                pos += 1
                neg += 1
            elif abs(det) <= tiny:
                zero += 2
            else:
                if a + c > 0:
                    pos += 2
                else:
                    neg += 2
            k += 2
    return pos, neg, zero


class _KktSolver:
    def __init__(self, dim):
        self.dim = dim
        probe = np.zeros((2, 2))
        self.sytrf, self.sytrf_lwork, self.sytrs = get_lapack_funcs(
            ("sytrf", "sytrf_lwork", "sytrs"), (probe,)
        )
        self.lwork = int(self.sytrf_lwork(dim)[0])

    def factor(self, K):
        ldu, ipiv, info = self.sytrf(K, lower=1, lwork=self.lwork)
        return ldu, ipiv, info

    def solve(self, ldu, ipiv, rhs):
        x, info = self.sytrs(ldu, ipiv, rhs.reshape(-1, 1), lower=1)
        return x.ravel()


def solve(
    model: ModelSpec | CompiledModel,
    opts: SolveOptions | None = None,
    warm_start=None,
    objective_override: tuple[np.ndarray, float] | None = None,
    bounds_override: dict[str, tuple[float, float]] | None = None,
) -> SolveResult:
    """Solve a polynomial model to the requested KKT tolerances.

    ``warm_start`` is a point in the full variable space (array or name
    map). ``objective_override`` replaces the objective by a linear
    function given as (coefficients in folded space, constant).
    """
    opts = opts or SolveOptions()
    cm = model if isinstance(model, CompiledModel) else CompiledModel(model)
    t0 = time.perf_counter()

    n = cm.n
    lb, ub = cm.bounds_vectors(bounds_override)
    if objective_override is not None:
        obj_c, obj_const = objective_override
        obj_block = None
    else:
        obj_c = obj_const = None
        obj_block = cm.obj

    mE, mI = cm.eq.m, cm.ineq.m
    dim = n + mE + mI
    kkt = _KktSolver(dim)

    def aug(x):
        return np.concatenate([x, [1.0]])

    def f_val(x, xa):
        if obj_block is None:
            return float(obj_c @ x + obj_const)
        return float(obj_block.values(x, xa)[0])

    def f_grad(x, xa):
        if obj_block is None:
            return obj_c.copy()
        return obj_block.jacobian(xa)[0]

    # start point: warm start clipped strictly inside the box
    if warm_start is None:
        x = 0.5 * (lb + ub)
    else:
        if isinstance(warm_start, dict):
            x = cm.fold_point(cm.spec.point_from_map(warm_start))
        else:
            x = cm.fold_point(warm_start)
    rng_box = ub - lb
    push = np.minimum(1e-2 * np.maximum(1.0, np.abs(lb)), 1e-2 * rng_box)
    push_u = np.minimum(1e-2 * np.maximum(1.0, np.abs(ub)), 1e-2 * rng_box)
    x = np.clip(x, lb + push, ub - push_u)

    xa = aug(x)
    # gradient-based scaling at the start point
    g0 = f_grad(x, xa)
    s_f = min(1.0, 100.0 / max(np.max(np.abs(g0)), 1e-8)) if g0.size else 1.0
    JE0 = cm.eq.jacobian(xa) if mE else np.zeros((0, n))
    JI0 = cm.ineq.jacobian(xa) if mI else np.zeros((0, n))
    s_E = np.minimum(1.0, 100.0 / np.maximum(np.max(np.abs(JE0), axis=1, initial=0.0), 1e-8)) if mE else np.zeros(0)
    s_I = np.minimum(1.0, 100.0 / np.maximum(np.max(np.abs(JI0), axis=1, initial=0.0), 1e-8)) if mI else np.zeros(0)

    def residuals(x, xa):
        cE = cm.eq.values(x, xa) * s_E if mE else np.zeros(0)
        cI = cm.ineq.values(x, xa) * s_I if mI else np.zeros(0)
        return cE, cI

    def unscaled_violation(x, xa):
        v = 0.0
        if mE:
            v = max(v, float(np.max(np.abs(cm.eq.values(x, xa)))))
        if mI:
            v = max(v, float(np.max(np.maximum(cm.ineq.values(x, xa), 0.0))))
        return v

    mu = opts.mu0
    mu_min = opts.tol / 11.0
    tau = max(0.99, 1.0 - mu)
    cE, cI = residuals(x, xa)
    s = np.maximum(-cI, 1e-4)
    zL = mu / (x - lb)
    zU = mu / (ub - x)
    w = mu / s
    yE = np.zeros(mE)
    yI = w.copy()

    nu = 1.0
    history = []
    best_viol = math.inf
    best_x = x.copy()
    ls_failures = 0
    restarts = 0
    delta_w_last = 0.0
    status = "iter_limit"
    it = 0

    def kkt_error(x, xa, s, yE, yI, zL, zU, w, cE, cI, mu_val):
        g = s_f * f_grad(x, xa)
        if mE:
            g = g + (cm.eq.jacobian(xa) * s_E[:, None]).T @ yE
        if mI:
            g = g + (cm.ineq.jacobian(xa) * s_I[:, None]).T @ yI
        g = g - zL + zU
        dual_sum = np.sum(np.abs(yE)) + np.sum(np.abs(yI)) + np.sum(np.abs(zL)) + np.sum(np.abs(zU)) + np.sum(np.abs(w))
        cnt = mE + mI + 3 * n if (mE + mI + n) else 1
        sd = max(100.0, dual_sum / max(cnt, 1)) / 100.0
        sc = max(100.0, (np.sum(np.abs(zL)) + np.sum(np.abs(zU)) + np.sum(np.abs(w))) / max(2 * n + mI, 1)) / 100.0
        parts = [np.max(np.abs(g)) / sd if g.size else 0.0]
        if mI:
            parts.append(np.max(np.abs(yI - w)) / sd)
            parts.append(np.max(np.abs(cI + s)))
            parts.append(np.max(np.abs(s * w - mu_val)) / sc)
        if mE:
            parts.append(np.max(np.abs(cE)))
        parts.append(np.max(np.abs((x - lb) * zL - mu_val)) / sc)
        parts.append(np.max(np.abs((ub - x) * zU - mu_val)) / sc)
        return float(max(parts))

    while True:
        if it >= opts.max_iter:
            status = "iter_limit"
            break
        if opts.time_limit is not None and time.perf_counter() - t0 > opts.time_limit:
            status = "iter_limit"
            break
        viol = unscaled_violation(x, xa)
        if viol < best_viol:
            best_viol = viol
            best_x = x.copy()
        e0 = kkt_error(x, xa, s, yE, yI, zL, zU, w, cE, cI, 0.0)
        if e0 <= opts.tol and viol <= opts.feas_tol:
            status = "optimal"
            break
        e_mu = kkt_error(x, xa, s, yE, yI, zL, zU, w, cE, cI, mu)
        if e_mu <= 10.0 * mu and mu > mu_min:
            mu = max(mu_min, min(0.2 * mu, mu**1.5))
            tau = max(0.99, 1.0 - mu)
            continue

        # assemble the reduced KKT system
        JE = cm.eq.jacobian(xa) * s_E[:, None] if mE else np.zeros((0, n))
        JI = cm.ineq.jacobian(xa) * s_I[:, None] if mI else np.zeros((0, n))
        H = np.zeros((n, n))
        if obj_block is not None:
            obj_block.add_hessian(xa, np.array([s_f]), H)
        if mE:
            cm.eq.add_hessian(xa, yE * s_E, H)
        if mI:
            cm.ineq.add_hessian(xa, yI * s_I, H)
        sigma_x = zL / (x - lb) + zU / (ub - x)

        grad_f = s_f * f_grad(x, xa)
        r_x = grad_f + (JE.T @ yE if mE else 0) + (JI.T @ yI if mI else 0) - mu / (x - lb) + mu / (ub - x)
        rhs = np.zeros(dim)
        rhs[:n] = -r_x
        if mE:
            rhs[n : n + mE] = -cE
        if mI:
            rhs[n + mE :] = -(cI + s) - mu / w + s * yI / w

        delta_w = 0.0
        delta_c = 0.0
        sol = None
        first_attempt = True
        while True:
            K = np.zeros((dim, dim))
            K[:n, :n] = H
            K[np.arange(n), np.arange(n)] += sigma_x + delta_w
            if mE:
                K[n : n + mE, :n] = JE
                K[:n, n : n + mE] = JE.T
                if delta_c:
                    K[range(n, n + mE), range(n, n + mE)] = -delta_c
            if mI:
                K[n + mE :, :n] = JI
                K[:n, n + mE :] = JI.T
                K[range(n + mE, dim), range(n + mE, dim)] = -s / w - delta_c
            ldu, ipiv, info = kkt.factor(K)
            if info == 0:
                pos, neg, zero = _inertia(ldu, ipiv, dim)
                if pos == n and zero == 0:
                    sol = kkt.solve(ldu, ipiv, rhs)
                    break
            if delta_c == 0.0:
                delta_c = 1e-8
            if delta_w == 0.0:
                # restart near the last successful shift to limit retries
                delta_w = max(1e-8, delta_w_last / 3.0) if first_attempt else 1e-8
                first_attempt = False
            else:
                delta_w *= 10.0
            if delta_w > 1e6:
                break
        if sol is None:
            status = "numerical_failure"
            break
        delta_w_last = delta_w

        dx = sol[:n]
        dyE = sol[n : n + mE] if mE else np.zeros(0)
        dyI = sol[n + mE :] if mI else np.zeros(0)
        ds = -(cI + s) - JI @ dx if mI else np.zeros(0)
        dw = dyI + (yI - w) if mI else np.zeros(0)
        # primal-dual elimination of the bound multipliers
        dzL = (mu - (x - lb) * zL) / (x - lb) - zL / (x - lb) * dx
        dzU = (mu - (ub - x) * zU) / (ub - x) + zU / (ub - x) * dx

        alpha_p = _ftb(x - lb, dx, tau)
        alpha_p = min(alpha_p, _ftb(ub - x, -dx, tau))
        if mI:
            alpha_p = min(alpha_p, _ftb(s, ds, tau))
        alpha_d = _ftb(zL, dzL, tau)
        alpha_d = min(alpha_d, _ftb(zU, dzU, tau))
        if mI:
            alpha_d = min(alpha_d, _ftb(w, dw, tau))

        # Armijo backtracking on the barrier merit with an l1 penalty
        def theta(xv, sv, xav):
            cEv, cIv = residuals(xv, xav)
            t = np.sum(np.abs(cEv)) if mE else 0.0
            if mI:
                t += np.sum(np.abs(cIv + sv))
            return t

        def phi(xv, sv, xav):
            val = s_f * f_val(xv, xav)
            val -= mu * (np.sum(np.log(xv - lb)) + np.sum(np.log(ub - xv)))
            if mI:
                val -= mu * np.sum(np.log(sv))
            return val

        dphi = float(grad_f @ dx - mu * np.sum(dx / (x - lb)) + mu * np.sum(dx / (ub - x)))
        if mI:
            dphi += float(-mu * np.sum(ds / s))
        th0 = theta(x, s, xa)
        # penalty tied to the dual magnitudes (exactness needs nu > |y|);
        # never divide by a vanishing infeasibility
        y_norm = 0.0
        if mE and yE.size:
            y_norm = max(y_norm, float(np.max(np.abs(yE + alpha_d * dyE))))
        if mI and yI.size:
            y_norm = max(y_norm, float(np.max(np.abs(yI + alpha_d * dyI))))
        nu = float(np.clip(1.1 * y_norm + 1.0, 1.0, 1e8))
        if th0 > 1e-7 and dphi > 0.0:
            nu = float(min(max(nu, 2.0 * dphi / th0), 1e8))
        D = dphi - nu * th0
        phi0 = phi(x, s, xa) + nu * th0
        accepted = False
        dual_alpha = alpha_d
        if D < -1e-14 * max(1.0, abs(phi0)):
            alpha = alpha_p
            while alpha > 1e-12:
                x_t = x + alpha * dx
                s_t = s + alpha * ds if mI else s
                xa_t = aug(x_t)
                phi_t = phi(x_t, s_t, xa_t) + nu * theta(x_t, s_t, xa_t)
                if phi_t <= phi0 + 1e-4 * alpha * D + 1e-14 * max(1.0, abs(phi0)):
                    accepted = True
                    if opts.debug_merit:
                        history.append((mu, nu, float(phi0), float(phi_t)))
                    break
                alpha *= 0.5
        if not accepted:
            # no merit decrease available: fall back to damping the full
            # primal-dual residual for the current barrier parameter
            r0 = e_mu
            alpha = min(alpha_p, alpha_d)
            while alpha > 1e-12:
                x_t = x + alpha * dx
                s_t = s + alpha * ds if mI else s
                xa_t = aug(x_t)
                cE_t, cI_t = residuals(x_t, xa_t)
                r_t = kkt_error(
                    x_t,
                    xa_t,
                    s_t,
                    yE + alpha * dyE if mE else yE,
                    yI + alpha * dyI if mI else yI,
                    np.maximum(zL + alpha * dzL, 1e-300),
                    np.maximum(zU + alpha * dzU, 1e-300),
                    np.maximum(w + alpha * dw, 1e-300) if mI else w,
                    cE_t,
                    cI_t,
                    mu,
                )
                if r_t <= (1.0 - 1e-4 * alpha) * r0:
                    accepted = True
                    dual_alpha = alpha
                    break
                alpha *= 0.5
        if not accepted:
            ls_failures += 1
            if ls_failures in (2, 4) and restarts < 2:
                # soft restart: reset slacks and duals around the current
                # primal point and back off the barrier parameter
                restarts += 1
                mu = max(mu, 1e-2)
                tau = max(0.99, 1.0 - mu)
                cE, cI = residuals(x, xa)
                if mI:
                    s = np.maximum(-cI, 1e-4)
                    w = mu / s
                    yI = w.copy()
                yE = np.zeros(mE)
                zL = mu / (x - lb)
                zU = mu / (ub - x)
                it += 1
                continue
            if ls_failures >= 5:
                status = "infeasible" if best_viol > 10 * opts.feas_tol else "numerical_failure"
                break
            # cautious short step to escape the stall
            alpha = min(1e-3, alpha_p)
            x_t = x + alpha * dx
            s_t = s + alpha * ds if mI else s
            xa_t = aug(x_t)
        else:
            ls_failures = 0

        x, s, xa = x_t, s_t, xa_t
        yE = yE + dual_alpha * dyE if mE else yE
        yI = yI + dual_alpha * dyI if mI else yI
        zL = zL + dual_alpha * dzL
        zU = zU + dual_alpha * dzU
        w = w + dual_alpha * dw if mI else w
        # dual safeguard keeps multipliers commensurate with the barrier
        kappa = 1e10
        zL = np.clip(zL, mu / (kappa * (x - lb)), kappa * mu / (x - lb))
        zU = np.clip(zU, mu / (kappa * (ub - x)), kappa * mu / (ub - x))
        if mI:
            w = np.clip(w, mu / (kappa * s), kappa * mu / s)
        cE, cI = residuals(x, xa)
        if opts.trace is not None:
            opts.trace(
                {
                    "iter": it,
                    "mu": mu,
                    "e0": e0,
                    "e_mu": e_mu,
                    "theta": th0,
                    "alpha": alpha,
                    "alpha_d": dual_alpha,
                    "delta_w": delta_w,
                    "nu": nu,
                    "accepted": accepted,
                    "viol": viol,
                    "obj": f_val(x, xa),
                }
            )
        it += 1

    if status != "optimal" and best_viol > 10 * opts.feas_tol and status != "numerical_failure":
        status = "infeasible"
    x_report = x if status == "optimal" else best_x
    xa_report = aug(x_report)
    full = cm.unfold(x_report)
    spec_obj = cm.spec.objective
    obj_val = f_val(x_report, xa_report) if objective_override is not None else float(
        spec_obj.value(full)
    )
    result = SolveResult(
        status=status,
        objective=obj_val,
        primal=cm.spec.primal_map(full),
        max_constraint_violation=unscaled_violation(x_report, xa_report),
        iterations=it,
        wall_time=time.perf_counter() - t0,
        kkt_error=kkt_error(x_report, xa_report, s, yE, yI, zL, zU, w, cE, cI, 0.0),
        duals={
            "y_eq": yE * s_E if mE else yE,
            "y_ineq": yI * s_I if mI else yI,
            "z_lower": zL,
            "z_upper": zU,
            "eq_tags": cm.eq_tags,
            "ineq_tags": cm.ineq_tags,
            "obj_scale": s_f,
        },
        merit_history=history,
    )
    return result


def _ftb(v, dv, tau):
    """Largest alpha in (0, 1] with v + alpha*dv >= (1 - tau) * v."""
    mask = dv < 0
    if not np.any(mask):
        return 1.0
    return float(min(1.0, np.min(-tau * v[mask] / dv[mask])))


# ---------------------------------------------------------------------------
# independent post-solve KKT verification (pure-Python expression path)


def verify_kkt(spec: ModelSpec, result: SolveResult) -> dict[str, float]:
    """Recompute stationarity/feasibility/complementarity residuals at the
    returned point from the symbolic polynomials, bypassing the compiled
    arrays and internal solver state.

    Stationarity is checked for the scaled problem the solver actually
    terminated on: obj_scale * grad(f) + sum(lambda * grad(c)) - zL + zU.
    """
    x = spec.point_from_map(result.primal)
    duals = result.duals or {}
    n = spec.n_vars()
    obj_scale = duals.get("obj_scale", 1.0)
    grad = np.zeros(n)
    for i, v in spec.objective.gradient(x).items():
        grad[i] += obj_scale * v
    eq_i = ineq_i = 0
    y_eq = np.asarray(duals.get("y_eq", np.zeros(0)))
    y_ineq = np.asarray(duals.get("y_ineq", np.zeros(0)))
    feas = 0.0
    comp = 0.0
    for c in spec.constraints:
        val = c.poly.value(x)
        if c.sense == EQ:
            lam = float(y_eq[eq_i]) if eq_i < len(y_eq) else 0.0
            eq_i += 1
            feas = max(feas, abs(val))
        else:
            sgn = 1.0 if c.sense == LE else -1.0
            lam = sgn * (float(y_ineq[ineq_i]) if ineq_i < len(y_ineq) else 0.0)
            ineq_i += 1
            feas = max(feas, max(sgn * val, 0.0))
            comp = max(comp, abs(lam * val))
        if lam != 0.0:
            for i, g in c.poly.gradient(x).items():
                grad[i] += lam * g
    zl = np.asarray(duals.get("z_lower", np.zeros(0)))
    zu = np.asarray(duals.get("z_upper", np.zeros(0)))
    free = [v for v in spec.variables if v.ub - v.lb > 1e-12]
    if len(zl) == len(free):
        for k, v in enumerate(free):
            grad[v.idx] -= zl[k]
            grad[v.idx] += zu[k]
            comp = max(comp, abs(zl[k] * (x[v.idx] - v.lb)), abs(zu[k] * (v.ub - x[v.idx])))
    free_idx = [v.idx for v in free]
    stat = float(np.max(np.abs(grad[free_idx]))) if free_idx else 0.0
    return {"stationarity": stat, "feasibility": feas, "complementarity": comp}


# ---------------------------------------------------------------------------
# multi-start local upper bounds on the nonconvex model


def local_upper_bound(
    net: Network,
    tries: int = 25,
    seed: int = 0,
    opts: SolveOptions | None = None,
    model: ModelSpec | None = None,
):
    """Best AC-feasible objective over ``tries`` randomized voltage starts.

    Returns (objective, primal map or None); +inf when no start converges
    to a feasible KKT point.
    """
    opts = opts or SolveOptions(max_iter=300)
    spec = model if model is not None else build_acopf(net)
    cm = CompiledModel(spec)
    rng = np.random.default_rng(seed)
    slack = net.slack_bus()
    best = math.inf
    best_point = None
    for k in range(tries):
        V = {}
        for b in net.buses:
            if k == 0:
                mag, ang = 0.5 * (b.vmin + b.vmax), 0.0
            else:
                mag = rng.uniform(b.vmin, b.vmax)
                ang = 0.0 if b.id == slack else rng.uniform(-0.25, 0.25)
            V[b.id] = mag * complex(math.cos(ang), math.sin(ang))
        x0 = lift_ac_point(spec, net, V)
        res = solve(cm, opts=opts, warm_start=x0)
        if res.optimal and res.max_constraint_violation <= opts.feas_tol:
            if res.objective < best:
                best = res.objective
                best_point = res.primal
    return best, best_point
