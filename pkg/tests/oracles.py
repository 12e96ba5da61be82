"""Brute-force oracles used by the test suite.

Grid enumeration of voltage magnitudes/angles on networks where every bus
hosts exactly one generator: each grid point forces a unique dispatch via
the bus balance, so feasibility reduces to box/thermal/angle checks and the
minimum over feasible points estimates the global optimum independently of
any solver.
"""

import math

import numpy as np


def _forced_dispatch(net, V):
    """Complex injection required at each bus; V maps bus id -> complex."""
    inj = {}
    for b in net.buses:
        inj[b.id] = b.demand + b.shunt.conjugate() * abs(V[b.id]) ** 2
    for br in net.branches:
        y, yc, T = br.y, br.y_charge, br.tap
        vi, vj = V[br.from_bus], V[br.to_bus]
        s_f = vi * (((y + yc) * vi / T - y * vj).conjugate()) / T
        s_t = vj * (((y + yc) * vj - y * vi / T).conjugate())
        inj[br.from_bus] += s_f
        inj[br.to_bus] += s_t
    return inj


def grid_scan(net, n_v=21, n_th=41, chunk=200_000):
    """Yield (cost_array, feasible_mask, V_matrix) over the whole grid.

    Magnitudes sweep [vmin, vmax] per bus; angles sweep [-pi/2, pi/2] per
    non-slack bus (the slack angle is fixed at zero).
    """
    buses = list(net.buses)
    nb = len(buses)
    assert nb <= 3, "grid oracle is for 2- and 3-bus networks"
    for b in buses:
        assert len(net.gens_at(b.id)) == 1, "oracle needs one generator per bus"
    slack = net.slack_bus()
    mags = [np.linspace(b.vmin, b.vmax, n_v) for b in buses]
    angs = [np.array([0.0]) if b.id == slack else np.linspace(-math.pi / 2, math.pi / 2, n_th) for b in buses]
    axes = mags + angs
    sizes = [len(a) for a in axes]
    total = int(np.prod(sizes))
    base = net.base_mva
    gens = {b.id: net.generators[net.gens_at(b.id)[0]] for b in buses}

    for start in range(0, total, chunk):
        idx = np.arange(start, min(start + chunk, total))
        coords = np.unravel_index(idx, sizes)
        V = {}
        for k, b in enumerate(buses):
            mag = axes[k][coords[k]]
            ang = axes[nb + k][coords[nb + k]]
            V[b.id] = mag * np.exp(1j * ang)
        inj = {b.id: b.demand + b.shunt.conjugate() * np.abs(V[b.id]) ** 2 for b in buses}
        feas = np.ones(len(idx), dtype=bool)
        for br in net.branches:
            y, yc, T = br.y, br.y_charge, br.tap
            vi, vj = V[br.from_bus], V[br.to_bus]
            s_f = vi * (((y + yc) * vi / T - y * vj).conjugate()) / T
            s_t = vj * (((y + yc) * vj - y * vi / T).conjugate())
            inj[br.from_bus] = inj[br.from_bus] + s_f
            inj[br.to_bus] = inj[br.to_bus] + s_t
            feas &= np.abs(s_f) ** 2 <= br.t_limit + 1e-12
            feas &= np.abs(s_t) ** 2 <= br.t_limit + 1e-12
            th = np.angle(vi * np.conj(vj))
            feas &= (th >= br.theta_min - 1e-12) & (th <= br.theta_max + 1e-12)
        cost = np.zeros(len(idx))
        for b in buses:
            g = gens[b.id]
            p, q = inj[b.id].real, inj[b.id].imag
            feas &= (p >= g.pmin - 1e-12) & (p <= g.pmax + 1e-12)
            feas &= (q >= g.qmin - 1e-12) & (q <= g.qmax + 1e-12)
            pm = p * base
            cost += g.c0 + g.c1 * pm + g.c2 * pm * pm
        yield cost, feas, V


def grid_global_minimum(net, n_v=21, n_th=41):
    """(best cost, best voltage map) over the feasible grid."""
    best = math.inf
    best_v = None
    for cost, feas, V in grid_scan(net, n_v, n_th):
        if not feas.any():
            continue
        masked = np.where(feas, cost, np.inf)
        k = int(np.argmin(masked))
        if masked[k] < best:
            best = float(masked[k])
            best_v = {bid: complex(np.asarray(arr).reshape(-1)[k]) for bid, arr in V.items()}
    return best, best_v


def grid_feasible_sample(net, n_v=7, n_th=9, max_points=200, seed=0):
    """A spread of AC-feasible (voltage map, cost) grid points."""
    pts = []
    for cost, feas, V in grid_scan(net, n_v, n_th):
        for k in np.flatnonzero(feas):
            pts.append(
                (
                    {bid: complex(np.asarray(arr).reshape(-1)[k]) for bid, arr in V.items()},
                    float(cost[k]),
                )
            )
    if len(pts) > max_points:
        rng = np.random.default_rng(seed)
        keep = rng.choice(len(pts), size=max_points, replace=False)
        pts = [pts[i] for i in sorted(keep)]
    return pts
