"""Model builders: nonconvex ACOPF, determinant-cut relaxations, RLT cuts.

All models are collections of polynomial constraints over a shared variable
registry. The W-space relaxations lift voltage products V_i*conj(V_j) into
real pairs (Wre, Wim) per within-clique bus pair; determinant cuts impose
nonnegativity of 2x2 and 3x3 principal minors of the lifted Hermitian
matrix, and the RLT layer adds current/power product identities with
McCormick and secant envelopes for the remaining bilinear/quadratic terms.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace

from . import expr
from .decomp import CliqueTree, enumerate_minors
from .expr import Poly
from .netmodel import Network, ensure_valid

LE, EQ, GE = "<=0", "=0", ">=0"

# angle bounds at +/- pi/2 make the tan-form rows vacuous (Wre >= 0 already)
_ANGLE_EPS = 1e-9

# 3x3 minors are enforced as det >= -DET3_SHIFT: at rank-1 points the
# determinant's gradient vanishes (zero adjugate), so the exact constraint is
# degenerate precisely where it is slackest; the shift keeps such rows
# strictly inactive without measurably weakening the relaxation (the bound
# moves by O(shift * dual), orders of magnitude below the gap tolerances)
DET3_SHIFT = 1e-6


class ModelBuildError(ValueError):
    pass


@dataclass(frozen=True)
class VarRef:
    name: str
    kind: str
    key: tuple
    lb: float
    ub: float
    idx: int


@dataclass(frozen=True)
class ConstraintExpr:
    poly: Poly
    sense: str  # one of LE, EQ, GE
    tag: str

    def violation(self, x) -> float:
        v = self.poly.value(x)
        if self.sense == EQ:
            return abs(v)
        if self.sense == LE:
            return max(v, 0.0)
        return max(-v, 0.0)

    def family(self) -> str:
        return self.tag.split("[")[0].split("{")[0]


class ModelSpec:
    """Variable registry plus constraint list; immutable once built."""

    def __init__(self, kind: str):
        self.kind = kind
        self.variables: list[VarRef] = []
        self.by_name: dict[str, VarRef] = {}
        self.constraints: list[ConstraintExpr] = []
        self.objective: Poly = Poly()
        self.meta: dict = {}

    def add_var(self, name, kind, key, lb, ub) -> VarRef:
        if name in self.by_name:
            raise ModelBuildError(f"duplicate variable {name}")
        if not (lb <= ub):
            raise ModelBuildError(f"variable {name}: lb {lb} > ub {ub}")
        if not (math.isfinite(lb) and math.isfinite(ub)):
            raise ModelBuildError(f"variable {name}: non-finite bounds [{lb}, {ub}]")
        ref = VarRef(name, kind, key, float(lb), float(ub), len(self.variables))
        self.variables.append(ref)
        self.by_name[name] = ref
        return ref

    def var(self, name) -> VarRef:
        return self.by_name[name]

    def poly(self, name) -> Poly:
        return Poly.variable(self.by_name[name].idx)

    def add_con(self, poly: Poly, sense: str, tag: str) -> None:
        self.constraints.append(ConstraintExpr(poly, sense, tag))

    def n_vars(self) -> int:
        return len(self.variables)

    def bounds_arrays(self):
        import numpy as np

        lb = np.array([v.lb for v in self.variables])
        ub = np.array([v.ub for v in self.variables])
        return lb, ub

    def max_violation(self, x) -> float:
        return max((c.violation(x) for c in self.constraints), default=0.0)

    def point_from_map(self, values: dict[str, float]):
        import numpy as np

        x = np.zeros(self.n_vars())
        for name, val in values.items():
            x[self.by_name[name].idx] = val
        return x

    def primal_map(self, x) -> dict[str, float]:
        return {v.name: float(x[v.idx]) for v in self.variables}

    def dump_text(self) -> str:
        lines = [f"model kind={self.kind} vars={self.n_vars()} cons={len(self.constraints)}"]
        lines.append("variables:")
        for v in self.variables:
            lines.append(f"  {v.name} in [{v.lb:.6g}, {v.ub:.6g}]")
        lines.append("minimize:")
        lines.append(f"  {self._poly_str(self.objective)}")
        lines.append("subject to:")
        for c in self.constraints:
            lines.append(f"  [{c.tag}] {self._poly_str(c.poly)} {c.sense}")
        return "\n".join(lines)

    def _poly_str(self, poly: Poly) -> str:
        if not poly.terms:
            return "0"
        parts = []
        for k in sorted(poly.terms, key=lambda t: (len(t), t)):
            c = poly.terms[k]
            mon = "*".join(self.variables[i].name for i in k)
            parts.append(f"{c:+.9g}" + (f"*{mon}" if mon else ""))
        return " ".join(parts)

    def to_json(self) -> str:
        """Replayable dump: variables, bounds, sparse polynomial terms."""
        doc = {
            "format": "polymodel-v1",
            "kind": self.kind,
            "variables": [
                {"name": v.name, "kind": v.kind, "lb": v.lb, "ub": v.ub} for v in self.variables
            ],
            "objective": _poly_terms(self.objective),
            "constraints": [
                {"tag": c.tag, "sense": c.sense, "terms": _poly_terms(c.poly)}
                for c in self.constraints
            ],
        }
        return json.dumps(doc, sort_keys=True)


def _poly_terms(poly: Poly):
    return [[poly.terms[k], list(k)] for k in sorted(poly.terms, key=lambda t: (len(t), t))]


# ---------------------------------------------------------------------------
# shared pieces


def _cost_poly(m: ModelSpec, net: Network) -> Poly:
    base = net.base_mva
    total = Poly()
    for g, gen in enumerate(net.generators):
        pg = m.poly(f"Pg[{g}]")
        total = total + gen.c0 + (gen.c1 * base) * pg + (gen.c2 * base * base) * (pg * pg)
    return total


def _add_gen_vars(m: ModelSpec, net: Network) -> None:
    for g, gen in enumerate(net.generators):
        m.add_var(f"Pg[{g}]", "Pg", (g,), gen.pmin, gen.pmax)
        m.add_var(f"Qg[{g}]", "Qg", (g,), gen.qmin, gen.qmax)


def _flow_bound(br) -> float:
    return math.sqrt(br.t_limit)


def _add_flow_vars(m: ModelSpec, net: Network, overrides) -> None:
    for e, br in enumerate(net.branches):
        fmax = _flow_bound(br)
        for d in ("f", "t"):
            for q in ("P", "Q"):
                kind = "Pflow" if q == "P" else "Qflow"
                name = f"{q}[{e}:{d}]"
                lb, ub = _override(name, -fmax, fmax, overrides)
                m.add_var(name, kind, (e, d), lb, ub)


def _override(name, lb, ub, overrides):
    if overrides and name in overrides:
        olb, oub = overrides[name]
        lb, ub = max(lb, olb), min(ub, oub)
        if lb > ub:  # keep a consistent (collapsed) interval
            mid = 0.5 * (lb + ub)
            lb = ub = mid
    return lb, ub


def _pair_sign(br, pair):
    """+1 when the branch's from-bus is the pair's smaller id."""
    return 1.0 if br.from_bus == pair[0] else -1.0


def _branch_pair(br):
    return (min(br.from_bus, br.to_bus), max(br.from_bus, br.to_bus))


@dataclass(frozen=True)
class _BranchCoefs:
    T2: float
    A_f: complex
    B_f: complex
    A_t: complex
    B_t: complex
    K_f: complex
    K_t: complex
    ysq: float  # |Y|^2
    ytot_sq: float  # |Y + Yc|^2


def _coefs(br) -> _BranchCoefs:
    y, yc, T = br.y, br.y_charge, br.tap
    T2 = abs(T) ** 2
    ytot = y + yc
    return _BranchCoefs(
        T2=T2,
        A_f=ytot.conjugate() / T2,
        B_f=-y.conjugate() / T,
        A_t=ytot.conjugate(),
        B_t=-y.conjugate() / T.conjugate(),
        K_f=y.conjugate() * ytot * T.conjugate(),
        K_t=y.conjugate() * ytot * T,
        ysq=abs(y) ** 2,
        ytot_sq=abs(ytot) ** 2,
    )


# ---------------------------------------------------------------------------
# Model: nonconvex ACOPF in rectangular voltages


def build_acopf(net: Network) -> ModelSpec:
    """Nonconvex reference model: rectangular voltages, explicit flows."""
    ensure_valid(net)
    m = ModelSpec("nonconvex")
    slack = net.slack_bus()
    for b in net.buses:
        if b.id == slack:
            m.add_var(f"Vre[{b.id}]", "Vre", (b.id,), b.vmin, b.vmax)
            m.add_var(f"Vim[{b.id}]", "Vim", (b.id,), 0.0, 0.0)
        else:
            m.add_var(f"Vre[{b.id}]", "Vre", (b.id,), -b.vmax, b.vmax)
            m.add_var(f"Vim[{b.id}]", "Vim", (b.id,), -b.vmax, b.vmax)
    _add_gen_vars(m, net)
    _add_flow_vars(m, net, None)

    def vsq(bus_id):
        vr, vi = m.poly(f"Vre[{bus_id}]"), m.poly(f"Vim[{bus_id}]")
        return vr * vr + vi * vi

    def vprod(i, j):
        """V_i * conj(V_j) as (real, imag) polynomials."""
        vri, vii = m.poly(f"Vre[{i}]"), m.poly(f"Vim[{i}]")
        vrj, vij = m.poly(f"Vre[{j}]"), m.poly(f"Vim[{j}]")
        return vri * vrj + vii * vij, vii * vrj - vri * vij

    for b in net.buses:
        w = vsq(b.id)
        m.add_con(b.vmin**2 - w, LE, f"vmag-lo[{b.id}]")
        m.add_con(w - b.vmax**2, LE, f"vmag-hi[{b.id}]")

    for e, br in enumerate(net.branches):
        co = _coefs(br)
        cr, ci = vprod(br.from_bus, br.to_bus)
        wi_f, wj_f = vsq(br.from_bus), vsq(br.to_bus)
        _flow_rows(m, e, co, wi_f, wj_f, cr, ci)
        _angle_rows(m, e, br, cr, ci)
        for d in ("f", "t"):
            p, q = m.poly(f"P[{e}:{d}]"), m.poly(f"Q[{e}:{d}]")
            m.add_con(p * p + q * q - br.t_limit, LE, f"thermal[{e}:{d}]")

    _balance_rows(m, net, vsq)
    m.objective = _cost_poly(m, net)
    m.meta = {"net": net.name, "slack": slack}
    return m


def _flow_rows(m, e, co, w_ii, w_jj, cr, ci):
    """Flow definition rows; (cr, ci) is the lifted from*conj(to) product."""
    p_f, q_f = m.poly(f"P[{e}:f]"), m.poly(f"Q[{e}:f]")
    p_t, q_t = m.poly(f"P[{e}:t]"), m.poly(f"Q[{e}:t]")
    m.add_con(p_f - co.A_f.real * w_ii - co.B_f.real * cr + co.B_f.imag * ci, EQ, f"flow-p-from[{e}]")
    m.add_con(q_f - co.A_f.imag * w_ii - co.B_f.imag * cr - co.B_f.real * ci, EQ, f"flow-q-from[{e}]")
    m.add_con(p_t - co.A_t.real * w_jj - co.B_t.real * cr - co.B_t.imag * ci, EQ, f"flow-p-to[{e}]")
    m.add_con(q_t - co.A_t.imag * w_jj - co.B_t.imag * cr + co.B_t.real * ci, EQ, f"flow-q-to[{e}]")


def _angle_rows(m, e, br, cr, ci):
    if br.theta_min > -math.pi / 2 + _ANGLE_EPS:
        m.add_con(math.tan(br.theta_min) * cr - ci, LE, f"angle-lo[{e}]")
    if br.theta_max < math.pi / 2 - _ANGLE_EPS:
        m.add_con(ci - math.tan(br.theta_max) * cr, LE, f"angle-hi[{e}]")


def _balance_rows(m, net, wii_of):
    by_bus_gens = {b.id: net.gens_at(b.id) for b in net.buses}
    out_flows: dict[int, list[tuple[int, str]]] = {b.id: [] for b in net.buses}
    for e, br in enumerate(net.branches):
        out_flows[br.from_bus].append((e, "f"))
        out_flows[br.to_bus].append((e, "t"))
    for b in net.buses:
        w = wii_of(b.id)
        p_expr = Poly() - b.demand.real - b.shunt.real * w
        q_expr = Poly() - b.demand.imag + b.shunt.imag * w
        for g in by_bus_gens[b.id]:
            p_expr = p_expr + m.poly(f"Pg[{g}]")
            q_expr = q_expr + m.poly(f"Qg[{g}]")
        for e, d in out_flows[b.id]:
            p_expr = p_expr - m.poly(f"P[{e}:{d}]")
            q_expr = q_expr - m.poly(f"Q[{e}:{d}]")
        m.add_con(p_expr, EQ, f"balance-p[{b.id}]")
        m.add_con(q_expr, EQ, f"balance-q[{b.id}]")


# ---------------------------------------------------------------------------
# W-space relaxations


def _pair_theta_cap(net) -> dict[tuple[int, int], float]:
    """Tightest symmetric angle cap per grid pair (min over parallel branches)."""
    caps: dict[tuple[int, int], float] = {}
    for br in net.branches:
        pair = _branch_pair(br)
        cap = max(abs(br.theta_min), abs(br.theta_max))
        caps[pair] = min(caps.get(pair, math.pi / 2), cap)
    return caps


def build_detsdp(
    net: Network,
    ct: CliqueTree,
    level: int = 3,
    bounds: dict[str, tuple[float, float]] | None = None,
) -> ModelSpec:
    """Relaxation in W-space with determinant cuts at the given level.

    Level 2 keeps only the 2x2 minors (the rotated second-order cone
    relaxation); level 3 adds every 3x3 principal minor within each clique
    of the tree decomposition.
    """
    ensure_valid(net)
    m = ModelSpec("det-soc" if level == 2 else "det3")
    bus_of = {b.id: b for b in net.buses}

    for b in net.buses:
        lb, ub = _override(f"Wii[{b.id}]", b.vmin**2, b.vmax**2, bounds)
        m.add_var(f"Wii[{b.id}]", "Wii", (b.id,), lb, ub)

    caps = _pair_theta_cap(net)
    if level == 2:
        # the 2x2 level is the rotated-cone relaxation on grid edges only;
        # fill-pair entries are decoupled there and would only add
        # degenerate free disks
        pairs = sorted(caps)
        minors = [mn for mn in enumerate_minors(ct, level) if mn.nodes in set(pairs)]
    else:
        pairs = ct.pairs()
        minors = enumerate_minors(ct, level)
    for a, bb in pairs:
        ba, bbb = bus_of[a], bus_of[bb]
        hi = ba.vmax * bbb.vmax
        if (a, bb) in caps:
            re_lo = ba.vmin * bbb.vmin * math.cos(caps[(a, bb)])
        else:
            re_lo = -hi  # fill pair: magnitude box only, no angle knowledge
        lb, ub = _override(f"Wre[{a},{bb}]", re_lo, hi, bounds)
        m.add_var(f"Wre[{a},{bb}]", "Wre", (a, bb), lb, ub)
        lb, ub = _override(f"Wim[{a},{bb}]", -hi, hi, bounds)
        m.add_var(f"Wim[{a},{bb}]", "Wim", (a, bb), lb, ub)

    _add_gen_vars(m, net)
    _add_flow_vars(m, net, bounds)

    for e, br in enumerate(net.branches):
        co = _coefs(br)
        pair = _branch_pair(br)
        sign = _pair_sign(br, pair)
        wr = m.poly(f"Wre[{pair[0]},{pair[1]}]")
        wi = m.poly(f"Wim[{pair[0]},{pair[1]}]")
        cr, ci = wr, sign * wi
        w_ii = m.poly(f"Wii[{br.from_bus}]")
        w_jj = m.poly(f"Wii[{br.to_bus}]")
        _flow_rows(m, e, co, w_ii, w_jj, cr, ci)
        _angle_rows(m, e, br, cr, ci)
        for d in ("f", "t"):
            p, q = m.poly(f"P[{e}:{d}]"), m.poly(f"Q[{e}:{d}]")
            m.add_con(p * p + q * q - br.t_limit, LE, f"thermal[{e}:{d}]")

    _balance_rows(m, net, lambda bus_id: m.poly(f"Wii[{bus_id}]"))

    for minor in minors:
        if len(minor.nodes) == 2:
            a, bb = minor.nodes
            d2 = expr.det2(
                m.poly(f"Wii[{a}]"),
                m.poly(f"Wii[{bb}]"),
                m.poly(f"Wre[{a},{bb}]"),
                m.poly(f"Wim[{a},{bb}]"),
            )
            m.add_con(d2, GE, f"det2{{{a},{bb}}}")
        else:
            a, bb, c = minor.nodes
            d3 = expr.det3(
                m.poly(f"Wii[{a}]"),
                m.poly(f"Wii[{bb}]"),
                m.poly(f"Wii[{c}]"),
                m.poly(f"Wre[{a},{bb}]"),
                m.poly(f"Wim[{a},{bb}]"),
                m.poly(f"Wre[{a},{c}]"),
                m.poly(f"Wim[{a},{c}]"),
                m.poly(f"Wre[{bb},{c}]"),
                m.poly(f"Wim[{bb},{c}]"),
            )
            m.add_con(d3 + DET3_SHIFT, GE, f"det3{{{a},{bb},{c}}}")

    m.objective = _cost_poly(m, net)
    m.meta = {
        "net": net.name,
        "ct": ct,
        "level": level,
        "pairs": pairs,
        "bounds": dict(bounds) if bounds else {},
    }
    return m


# ---------------------------------------------------------------------------
# envelopes


def secant_rows(yhat: Poly, x: Poly, xl: float, xu: float, tag: str):
    """Convex envelope of yhat = x^2 on [xl, xu]: parabola below, chord above."""
    return [
        (x * x - yhat, LE, f"{tag}-quad"),
        (yhat - (xl + xu) * x + xl * xu, LE, f"{tag}-chord"),
    ]


def mccormick_rows(z: Poly, x: Poly, y: Poly, xl, xu, yl, yu, tag: str):
    """Four-inequality convex hull of z = x*y over the box [xl,xu]x[yl,yu]."""
    return [
        (xl * y + yl * x - xl * yl - z, LE, f"{tag}-ll"),
        (xu * y + yu * x - xu * yu - z, LE, f"{tag}-uu"),
        (z - xu * y - yl * x + xu * yl, LE, f"{tag}-ul"),
        (z - xl * y - yu * x + xl * yu, LE, f"{tag}-lu"),
    ]


def _square_bounds(lb, ub):
    hi = max(lb * lb, ub * ub)
    lo = 0.0 if lb <= 0.0 <= ub else min(lb * lb, ub * ub)
    return lo, hi


def _product_bounds(xl, xu, yl, yu):
    corners = [xl * yl, xl * yu, xu * yl, xu * yu]
    return min(corners), max(corners)


# ---------------------------------------------------------------------------
# RLT strengthening


def add_rlt_cuts(
    m: ModelSpec,
    net: Network,
    bounds: dict[str, tuple[float, float]] | None = None,
) -> ModelSpec:
    """Current/power product identities plus envelopes, per directed edge.

    Adds squared-current variables tied linearly to W entries, lifted
    squared-flow variables with secant envelopes, the lifted thermal row,
    and McCormick envelopes for the current*voltage-magnitude product. The
    quadratic thermal rows of the input model become redundant and are
    dropped.
    """
    if m.kind not in ("det-soc", "det3"):
        raise ModelBuildError(f"RLT cuts expect a determinant relaxation, got kind {m.kind}")
    bus_of = {b.id: b for b in net.buses}
    out = ModelSpec(m.kind + "-rlt")
    for v in m.variables:
        out.add_var(v.name, v.kind, v.key, v.lb, v.ub)
    for c in m.constraints:
        if c.family() == "thermal":
            continue  # implied by the lifted thermal + secants
        out.constraints.append(c)

    for e, br in enumerate(net.branches):
        co = _coefs(br)
        pair = _branch_pair(br)
        sign = _pair_sign(br, pair)
        wr = out.poly(f"Wre[{pair[0]},{pair[1]}]")
        wi = out.poly(f"Wim[{pair[0]},{pair[1]}]")
        w_ii = out.poly(f"Wii[{br.from_bus}]")
        w_jj = out.poly(f"Wii[{br.to_bus}]")
        t = br.t_limit

        for d, at_bus in (("f", br.from_bus), ("t", br.to_bus)):
            at = bus_of[at_bus]
            # squared current magnitude; the from side measures the
            # transformer-internal current, hence the |T|^2 factor
            l_cap = t / at.vmin**2 * (co.T2 if d == "f" else 1.0)
            lname = f"L[{e}:{d}]"
            lb, ub = _override(lname, 0.0, l_cap, bounds)
            lvar = out.add_var(lname, "L", (e, d), lb, ub)
            l = Poly.variable(lvar.idx)

            if d == "f":
                body = (
                    co.ytot_sq * w_ii
                    - 2.0 * co.K_f.real * wr
                    + 2.0 * co.K_f.imag * sign * wi
                    + co.ysq * co.T2 * w_jj
                )
            else:
                body = (
                    co.ytot_sq * co.T2 * w_jj
                    - 2.0 * co.K_t.real * wr
                    - 2.0 * co.K_t.imag * sign * wi
                    + co.ysq * w_ii
                )
            out.add_con(co.T2 * l - body, EQ, f"current[{e}:{d}]")

            pref = out.var(f"P[{e}:{d}]")
            qref = out.var(f"Q[{e}:{d}]")
            for fname, ref in ((f"Phat[{e}:{d}]", pref), (f"Qhat[{e}:{d}]", qref)):
                if not (math.isfinite(ref.lb) and math.isfinite(ref.ub)):
                    raise ModelBuildError(f"envelope parent {ref.name} lacks finite bounds")
                lo, hi = _square_bounds(ref.lb, ref.ub)
                lo, hi = _override(fname, lo, hi, bounds)
                kind = "Phat" if fname.startswith("P") else "Qhat"
                out.add_var(fname, kind, (e, d), lo, hi)
            phat = out.poly(f"Phat[{e}:{d}]")
            qhat = out.poly(f"Qhat[{e}:{d}]")

            w_at = w_ii if d == "f" else w_jj
            w_at_ref = out.var(f"Wii[{at_bus}]")
            lw_lo, lw_hi = _product_bounds(w_at_ref.lb, w_at_ref.ub, lvar.lb, lvar.ub)
            lw_lo, lw_hi = _override(f"LW[{e}:{d}]", lw_lo, lw_hi, bounds)
            lw_ref = out.add_var(f"LW[{e}:{d}]", "LWhat", (e, d), lw_lo, lw_hi)
            lw = Poly.variable(lw_ref.idx)

            scale = co.T2 if d == "f" else 1.0
            out.add_con(lw - scale * (phat + qhat), EQ, f"lifted-power[{e}:{d}]")
            out.add_con(phat + qhat - t, LE, f"lifted-thermal[{e}:{d}]")

            for rows in (
                secant_rows(phat, out.poly(pref.name), pref.lb, pref.ub, f"sec-p[{e}:{d}]"),
                secant_rows(qhat, out.poly(qref.name), qref.lb, qref.ub, f"sec-q[{e}:{d}]"),
                mccormick_rows(
                    lw, w_at, l, w_at_ref.lb, w_at_ref.ub, lvar.lb, lvar.ub, f"mc[{e}:{d}]"
                ),
            ):
                for poly, sense, tag in rows:
                    out.add_con(poly, sense, tag)

    out.objective = m.objective
    out.meta = dict(m.meta)
    out.meta["rlt"] = True
    if bounds:
        merged = dict(out.meta.get("bounds", {}))
        merged.update(bounds)
        out.meta["bounds"] = merged
    return out


# ---------------------------------------------------------------------------
# OBBT subproblem


def build_obbt_sub(m: ModelSpec, target: VarRef | str, sense: str, f_bar: float) -> ModelSpec:
    """Bound-probing variant: optimize one variable under a cost cutoff."""
    if m.kind == "nonconvex":
        raise ModelBuildError("bound probing requires a convex relaxation model")
    if sense not in ("min", "max"):
        raise ModelBuildError(f"sense must be min or max, got {sense}")
    ref = m.var(target) if isinstance(target, str) else target
    out = ModelSpec("obbt-sub")
    out.variables = m.variables  # shared, immutable
    out.by_name = m.by_name
    out.constraints = list(m.constraints)
    if math.isfinite(f_bar):
        out.add_con(m.objective - f_bar, LE, "cutoff")
    x = Poly.variable(ref.idx)
    out.objective = x if sense == "min" else -x
    out.meta = {"target": ref.name, "sense": sense, "f_bar": f_bar, "parent_kind": m.kind}
    return out


def tightenable_names(m: ModelSpec) -> list[str]:
    """Variables whose domains the bound-tightening loop probes."""
    return [v.name for v in m.variables if v.kind in ("Wii", "Wre", "Wim", "L")]


# ---------------------------------------------------------------------------
# convenience: one-call relaxation construction, AC point lifting

RELAXATION_KINDS = ("soc", "det3", "rlt-only", "det3+rlt")


def build_relaxation(
    net: Network,
    ct: CliqueTree,
    kind: str = "det3+rlt",
    bounds: dict[str, tuple[float, float]] | None = None,
) -> ModelSpec:
    if kind == "soc":
        return build_detsdp(net, ct, level=2, bounds=bounds)
    if kind == "det3":
        return build_detsdp(net, ct, level=3, bounds=bounds)
    if kind == "rlt-only":
        return add_rlt_cuts(build_detsdp(net, ct, level=2, bounds=bounds), net, bounds=bounds)
    if kind == "det3+rlt":
        return add_rlt_cuts(build_detsdp(net, ct, level=3, bounds=bounds), net, bounds=bounds)
    raise ModelBuildError(f"unknown relaxation kind {kind!r}; expected one of {RELAXATION_KINDS}")


def lift_ac_point(m: ModelSpec, net: Network, voltages: dict[int, complex]):
    """Map bus voltages to a full point of any model built here.

    Generator injections are recovered from the bus balance; buses hosting
    several generators split the residual injection equally (adequate for
    warm starts; exact for the single-generator test networks).
    """
    import numpy as np

    V = voltages
    inj: dict[int, complex] = {}
    for b in net.buses:
        s = b.demand + b.shunt.conjugate() * (abs(V[b.id]) ** 2)
        inj[b.id] = s
    flows: dict[tuple[int, str], complex] = {}
    currents: dict[tuple[int, str], float] = {}
    for e, br in enumerate(net.branches):
        y, yc, T = br.y, br.y_charge, br.tap
        vi, vj = V[br.from_bus], V[br.to_bus]
        i_f = (y + yc) * vi / T - y * vj
        i_t = (y + yc) * vj - y * vi / T
        s_f = vi * i_f.conjugate() / T
        s_t = vj * i_t.conjugate()
        flows[(e, "f")] = s_f
        flows[(e, "t")] = s_t
        currents[(e, "f")] = abs(i_f) ** 2
        currents[(e, "t")] = abs(i_t) ** 2
        inj[br.from_bus] += s_f
        inj[br.to_bus] += s_t

    x = np.zeros(m.n_vars())
    for v in m.variables:
        if v.kind == "Vre":
            x[v.idx] = V[v.key[0]].real
        elif v.kind == "Vim":
            x[v.idx] = V[v.key[0]].imag
        elif v.kind == "Wii":
            x[v.idx] = abs(V[v.key[0]]) ** 2
        elif v.kind == "Wre":
            a, b = v.key
            x[v.idx] = (V[a] * V[b].conjugate()).real
        elif v.kind == "Wim":
            a, b = v.key
            x[v.idx] = (V[a] * V[b].conjugate()).imag
        elif v.kind == "Pflow":
            x[v.idx] = flows[v.key].real
        elif v.kind == "Qflow":
            x[v.idx] = flows[v.key].imag
        elif v.kind == "L":
            x[v.idx] = currents[v.key]
        elif v.kind in ("Pg", "Qg"):
            gen = net.generators[v.key[0]]
            share = inj[gen.bus] / len(net.gens_at(gen.bus))
            x[v.idx] = share.real if v.kind == "Pg" else share.imag
    # second pass: lifted squares/products depend on the filled entries
    for v in m.variables:
        if v.kind == "Phat":
            x[v.idx] = x[m.by_name[f"P[{v.key[0]}:{v.key[1]}]"].idx] ** 2
        elif v.kind == "Qhat":
            x[v.idx] = x[m.by_name[f"Q[{v.key[0]}:{v.key[1]}]"].idx] ** 2
        elif v.kind == "LWhat":
            e, d = v.key
            at_bus = net.branches[e].from_bus if d == "f" else net.branches[e].to_bus
            x[v.idx] = x[m.by_name[f"L[{e}:{d}]"].idx] * x[m.by_name[f"Wii[{at_bus}]"].idx]
    return x
