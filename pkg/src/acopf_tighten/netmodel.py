"""MATPOWER-style case parsing and the per-unit network data model.

Supported input is the usual subset of the MATPOWER ``.m`` format: scalar
``mpc.baseMVA``, the ``mpc.bus`` / ``mpc.gen`` / ``mpc.branch`` /
``mpc.gencost`` matrices, ``%`` comments. Cost model must be polynomial
(type 2) with degree <= 3. Everything is converted to per-unit on parse;
cost coefficients are kept in their native $/MW^k h units.
"""

from __future__ import annotations

import cmath
import json
import math
from dataclasses import dataclass, field

DEFAULT_ANGLE_LIMIT = math.pi / 2

# rateA = 0 means "no thermal limit"; envelopes need a finite box, so a
# surrogate limit of 5x the total apparent demand is substituted (floored
# at 1 p.u. so zero-load cases keep room for charging currents).
UNLIMITED_RATE_FACTOR = 5.0
UNLIMITED_RATE_FLOOR = 1.0


class CaseParseError(ValueError):
    """Malformed case text. Carries a 1-based line number when known."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class CaseValidationError(ValueError):
    """Structurally parsed but semantically unusable case data."""


@dataclass(frozen=True)
class Bus:
    id: int
    demand: complex  # S^d, p.u.
    shunt: complex  # Y^s, p.u.
    vmin: float
    vmax: float
    is_slack: bool = False


@dataclass(frozen=True)
class Generator:
    bus: int
    pmin: float  # p.u.
    pmax: float
    qmin: float
    qmax: float
    c0: float  # $/h
    c1: float  # $/MWh
    c2: float  # $/MWh^2


@dataclass(frozen=True)
class Branch:
    from_bus: int
    to_bus: int
    r: float
    x: float
    y: complex  # series admittance 1/(r+ix), p.u.
    y_charge: complex  # per-side charging admittance i*b/2, p.u.
    tap: complex  # complex ratio, magnitude > 0
    t_limit: float  # squared apparent-power limit, p.u.^2
    theta_min: float  # rad
    theta_max: float  # rad
    limit_is_surrogate: bool = False


@dataclass(frozen=True)
class Network:
    base_mva: float
    buses: tuple[Bus, ...]
    generators: tuple[Generator, ...]
    branches: tuple[Branch, ...]
    name: str = ""

    def bus_ids(self) -> list[int]:
        return [b.id for b in self.buses]

    def bus(self, bus_id: int) -> Bus:
        for b in self.buses:
            if b.id == bus_id:
                return b
        raise KeyError(bus_id)

    def gens_at(self, bus_id: int) -> list[int]:
        return [g for g, gen in enumerate(self.generators) if gen.bus == bus_id]

    def slack_bus(self) -> int:
        for b in self.buses:
            if b.is_slack:
                return b.id
        raise CaseValidationError("network has no slack (type 3) bus")

    def edges(self) -> list[tuple[int, int]]:
        """Unordered (from, to) per branch, in branch order."""
        return [(br.from_bus, br.to_bus) for br in self.branches]

    def total_demand(self) -> complex:
        return sum((b.demand for b in self.buses), 0j)


def _strip_comment(line: str) -> str:
    pos = line.find("%")
    return line if pos < 0 else line[:pos]


def _parse_matrices(text: str) -> tuple[dict[str, list[tuple[int, list[float]]]], dict[str, float], str]:
    """Split case text into named matrices and scalars.

    Matrices map name -> list of (line_no, row floats); scalars map
    name -> float. Also returns the case name from the function header.
    """
    matrices: dict[str, list[tuple[int, list[float]]]] = {}
    scalars: dict[str, float] = {}
    name = ""
    current: str | None = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = _strip_comment(raw).strip()
        if not line:
            continue
        if line.startswith("function"):
            parts = line.replace("=", " ").split()
            if parts:
                name = parts[-1]
            continue
        if current is None:
            if "=" in line and line.split("=", 1)[0].strip().startswith("mpc."):
                lhs, rhs = line.split("=", 1)
                key = lhs.strip()[4:]
                rhs = rhs.strip()
                if rhs.startswith("["):
                    matrices[key] = []
                    current = key
                    rhs = rhs[1:].strip()
                    if rhs.endswith("];"):
                        rhs = rhs[:-2].strip()
                        current = None
                    if rhs:
                        for chunk in rhs.split(";"):
                            if chunk.strip():
                                matrices[key].append((lineno, _row_floats(chunk, lineno)))
                elif rhs.rstrip(";").strip().startswith("'"):
                    continue  # string fields like mpc.version
                else:
                    val = rhs.rstrip(";").strip()
                    try:
                        scalars[key] = float(val)
                    except ValueError as exc:
                        raise CaseParseError(f"bad scalar for mpc.{key}: {val!r}", lineno) from exc
            continue
        # inside a matrix block
        if line.startswith("]"):
            current = None
            continue
        body = line
        closed = False
        if "]" in body:
            body = body.split("]", 1)[0]
            closed = True
        for chunk in body.split(";"):
            if chunk.strip():
                matrices[current].append((lineno, _row_floats(chunk, lineno)))
        if closed:
            current = None
    if current is not None:
        raise CaseParseError(f"matrix mpc.{current} never closed with ']'")
    return matrices, scalars, name


def _row_floats(chunk: str, lineno: int) -> list[float]:
    vals = []
    for tok in chunk.replace(",", " ").split():
        try:
            vals.append(float(tok))
        except ValueError as exc:
            raise CaseParseError(f"bad numeric token {tok!r}", lineno) from exc
    return vals


def parse_case(text: str, name: str = "") -> Network:
    """Parse MATPOWER case text into a validated per-unit :class:`Network`.

    Raises :class:`CaseParseError` for malformed tables and
    :class:`CaseValidationError` for fatally inconsistent data (missing
    gencost rows, nonpositive voltage lower bounds, unusable cost model).
    Non-fatal inconsistencies are left to :func:`validate`.
    """
    matrices, scalars, parsed_name = _parse_matrices(text)
    for required in ("bus", "gen", "branch"):
        if required not in matrices:
            raise CaseParseError(f"missing mpc.{required} table")
    base = scalars.get("baseMVA")
    if base is None or base <= 0:
        raise CaseParseError("missing or nonpositive mpc.baseMVA")

    buses = []
    for lineno, row in matrices["bus"]:
        if len(row) < 13:
            raise CaseParseError(f"bus row needs 13 columns, got {len(row)}", lineno)
        bus_type = int(row[1])
        if bus_type == 4:
            continue  # isolated bus
        vmax, vmin = row[11], row[12]
        if vmin <= 0:
            raise CaseValidationError(f"bus {int(row[0])}: nonpositive vmin {vmin}")
        buses.append(
            Bus(
                id=int(row[0]),
                demand=complex(row[2] / base, row[3] / base),
                shunt=complex(row[4] / base, row[5] / base),
                vmin=vmin,
                vmax=vmax,
                is_slack=(bus_type == 3),
            )
        )

    gen_rows = [(ln, row) for ln, row in matrices["gen"]]
    cost_rows = matrices.get("gencost", [])
    if len(cost_rows) != len(gen_rows):
        raise CaseValidationError(
            f"gencost has {len(cost_rows)} rows for {len(gen_rows)} generators"
        )
    generators = []
    for (lineno, row), (cost_lineno, cost) in zip(gen_rows, cost_rows):
        if len(row) < 10:
            raise CaseParseError(f"gen row needs 10 columns, got {len(row)}", lineno)
        status = int(row[7])
        if status <= 0:
            continue
        if len(cost) < 4:
            raise CaseParseError("gencost row needs at least 4 columns", cost_lineno)
        model = int(cost[0])
        if model != 2:
            raise CaseValidationError(
                f"gencost line {cost_lineno}: only polynomial cost model 2 supported"
            )
        ncoef = int(cost[3])
        if ncoef > 3:
            raise CaseValidationError(
                f"gencost line {cost_lineno}: polynomial degree {ncoef - 1} > 2 unsupported"
            )
        coefs = cost[4 : 4 + ncoef]
        if len(coefs) != ncoef:
            raise CaseParseError("gencost row shorter than declared n", cost_lineno)
        padded = [0.0] * (3 - ncoef) + list(coefs)  # [c2, c1, c0]
        generators.append(
            Generator(
                bus=int(row[0]),
                pmin=row[9] / base,
                pmax=row[8] / base,
                qmin=row[4] / base,
                qmax=row[3] / base,
                c0=padded[2],
                c1=padded[1],
                c2=padded[0],
            )
        )

    total_sd = sum(abs(b.demand) for b in buses)
    surrogate_rate = UNLIMITED_RATE_FACTOR * max(total_sd, UNLIMITED_RATE_FLOOR)
    branches = []
    for lineno, row in matrices["branch"]:
        if len(row) < 11:
            raise CaseParseError(f"branch row needs 11+ columns, got {len(row)}", lineno)
        status = int(row[10])
        if status <= 0:
            continue
        r, x, b = row[2], row[3], row[4]
        if r == 0 and x == 0:
            raise CaseValidationError(f"branch line {lineno}: zero series impedance")
        y = 1.0 / complex(r, x)
        rate = row[5] / base
        surrogate = rate <= 0
        if surrogate:
            rate = surrogate_rate
        ratio = row[8] if row[8] != 0 else 1.0
        shift = math.radians(row[9])
        theta_min = math.radians(row[11]) if len(row) > 11 else 0.0
        theta_max = math.radians(row[12]) if len(row) > 12 else 0.0
        if theta_min == 0.0 and theta_max == 0.0:
            theta_min, theta_max = -DEFAULT_ANGLE_LIMIT, DEFAULT_ANGLE_LIMIT
        theta_min = max(theta_min, -DEFAULT_ANGLE_LIMIT)
        theta_max = min(theta_max, DEFAULT_ANGLE_LIMIT)
        branches.append(
            Branch(
                from_bus=int(row[0]),
                to_bus=int(row[1]),
                r=r,
                x=x,
                y=y,
                y_charge=complex(0.0, b / 2.0),
                tap=cmath.rect(ratio, shift),
                t_limit=rate * rate,
                theta_min=theta_min,
                theta_max=theta_max,
                limit_is_surrogate=surrogate,
            )
        )

    return Network(
        base_mva=base,
        buses=tuple(buses),
        generators=tuple(generators),
        branches=tuple(branches),
        name=name or parsed_name,
    )


def load_case(path) -> Network:
    from pathlib import Path

    p = Path(path)
    return parse_case(p.read_text(), name=p.stem)


# ---------------------------------------------------------------------------
# validation


def validate(net: Network) -> list[str]:
    """Check all data-model invariants; returns one message per violation."""
    out = []
    ids = net.bus_ids()
    id_set = set(ids)
    if len(id_set) != len(ids):
        dupes = sorted({i for i in ids if ids.count(i) > 1})
        out.append(f"duplicate bus ids: {dupes}")
    slack = [b.id for b in net.buses if b.is_slack]
    if len(slack) != 1:
        out.append(f"expected exactly one slack bus, found {slack}")
    for b in net.buses:
        if b.vmin <= 0:
            out.append(f"bus {b.id}: nonpositive vmin {b.vmin}")
        if b.vmin > b.vmax:
            out.append(f"bus {b.id}: vmin {b.vmin} > vmax {b.vmax}")
    for g, gen in enumerate(net.generators):
        if gen.bus not in id_set:
            out.append(f"generator {g}: dangling reference to absent bus {gen.bus}")
        if gen.pmin > gen.pmax:
            out.append(f"generator {g}: pmin {gen.pmin} > pmax {gen.pmax}")
        if gen.qmin > gen.qmax:
            out.append(f"generator {g}: qmin {gen.qmin} > qmax {gen.qmax}")
        if gen.c2 < 0:
            out.append(f"generator {g}: negative quadratic cost {gen.c2}")
    for e, br in enumerate(net.branches):
        if br.from_bus not in id_set or br.to_bus not in id_set:
            out.append(f"branch {e}: endpoint not a known bus ({br.from_bus},{br.to_bus})")
        if br.from_bus == br.to_bus:
            out.append(f"branch {e}: self-loop at bus {br.from_bus}")
        if abs(br.tap) <= 0:
            out.append(f"branch {e}: zero tap magnitude")
        if br.t_limit <= 0:
            out.append(f"branch {e}: nonpositive thermal limit")
        if not (-DEFAULT_ANGLE_LIMIT - 1e-12 <= br.theta_min <= br.theta_max <= DEFAULT_ANGLE_LIMIT + 1e-12):
            out.append(f"branch {e}: angle bounds [{br.theta_min},{br.theta_max}] out of order or range")
    if not out:
        comps = _components(net)
        if len(comps) > 1:
            out.append(f"network is disconnected: components {[sorted(c) for c in comps]}")
    return out


def ensure_valid(net: Network) -> Network:
    violations = validate(net)
    if violations:
        raise CaseValidationError("; ".join(violations))
    return net


def _components(net: Network) -> list[set[int]]:
    adj: dict[int, set[int]] = {b.id: set() for b in net.buses}
    for br in net.branches:
        if br.from_bus in adj and br.to_bus in adj:
            adj[br.from_bus].add(br.to_bus)
            adj[br.to_bus].add(br.from_bus)
    seen: set[int] = set()
    comps = []
    for start in adj:
        if start in seen:
            continue
        comp = {start}
        stack = [start]
        while stack:
            u = stack.pop()
            for v in adj[u]:
                if v not in comp:
                    comp.add(v)
                    stack.append(v)
        seen |= comp
        comps.append(comp)
    return comps


# ---------------------------------------------------------------------------
# canonical JSON dump


def to_json(net: Network) -> str:
    """Canonical JSON dump (stable key order, exact float round-trip)."""
    doc = {
        "base_mva": net.base_mva,
        "name": net.name,
        "buses": [
            {
                "id": b.id,
                "demand": [b.demand.real, b.demand.imag],
                "shunt": [b.shunt.real, b.shunt.imag],
                "vmin": b.vmin,
                "vmax": b.vmax,
                "is_slack": b.is_slack,
            }
            for b in net.buses
        ],
        "generators": [
            {
                "bus": g.bus,
                "pmin": g.pmin,
                "pmax": g.pmax,
                "qmin": g.qmin,
                "qmax": g.qmax,
                "c0": g.c0,
                "c1": g.c1,
                "c2": g.c2,
            }
            for g in net.generators
        ],
        "branches": [
            {
                "from": br.from_bus,
                "to": br.to_bus,
                "r": br.r,
                "x": br.x,
                "y": [br.y.real, br.y.imag],
                "y_charge": [br.y_charge.real, br.y_charge.imag],
                "tap": [br.tap.real, br.tap.imag],
                "t_limit": br.t_limit,
                "theta_min": br.theta_min,
                "theta_max": br.theta_max,
                "limit_is_surrogate": br.limit_is_surrogate,
            }
            for br in net.branches
        ],
    }
    return json.dumps(doc, sort_keys=True, indent=1)


def from_json(text: str) -> Network:
    doc = json.loads(text)
    return Network(
        base_mva=doc["base_mva"],
        name=doc.get("name", ""),
        buses=tuple(
            Bus(
                id=b["id"],
                demand=complex(*b["demand"]),
                shunt=complex(*b["shunt"]),
                vmin=b["vmin"],
                vmax=b["vmax"],
                is_slack=b["is_slack"],
            )
            for b in doc["buses"]
        ),
        generators=tuple(
            Generator(
                bus=g["bus"],
                pmin=g["pmin"],
                pmax=g["pmax"],
                qmin=g["qmin"],
                qmax=g["qmax"],
                c0=g["c0"],
                c1=g["c1"],
                c2=g["c2"],
            )
            for g in doc["generators"]
        ),
        branches=tuple(
            Branch(
                from_bus=br["from"],
                to_bus=br["to"],
                r=br["r"],
                x=br["x"],
                y=complex(*br["y"]),
                y_charge=complex(*br["y_charge"]),
                tap=complex(*br["tap"]),
                t_limit=br["t_limit"],
                theta_min=br["theta_min"],
                theta_max=br["theta_max"],
                limit_is_surrogate=br["limit_is_surrogate"],
            )
            for br in doc["branches"]
        ),
    )
