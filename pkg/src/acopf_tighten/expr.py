"""Sparse polynomial expressions over an integer-indexed variable space.

Every model constraint and objective in this package is a polynomial of
total degree <= 3 (degree 3 only from 3x3 determinant expansions), so a
flat monomial map gives exact values, gradients and Hessians without a
general expression-graph walker.
"""

from __future__ import annotations

MAX_DEGREE = 3


class Poly:
    """Polynomial as {sorted variable-index tuple: coefficient}.

    The empty tuple keys the constant term. Variable indices are
    nonnegative ints assigned by the enclosing model's registry.
    """

    __slots__ = ("terms",)

    def __init__(self, terms: dict[tuple[int, ...], float] | None = None):
        self.terms = terms if terms is not None else {}

    @classmethod
    def constant(cls, c: float) -> "Poly":
        return cls({(): float(c)} if c != 0 else {})

    @classmethod
    def variable(cls, idx: int) -> "Poly":
        return cls({(int(idx),): 1.0})

    def copy(self) -> "Poly":
        return Poly(dict(self.terms))

    def degree(self) -> int:
        return max((len(k) for k in self.terms), default=0)

    def _iadd_term(self, key: tuple[int, ...], coef: float) -> None:
        cur = self.terms.get(key, 0.0) + coef
        if cur == 0.0:
            self.terms.pop(key, None)
        else:
            self.terms[key] = cur

    def __add__(self, other):
        out = self.copy()
        if isinstance(other, Poly):
            for k, c in other.terms.items():
                out._iadd_term(k, c)
        else:
            out._iadd_term((), float(other))
        return out

    __radd__ = __add__

    def __neg__(self):
        return Poly({k: -c for k, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-other if isinstance(other, Poly) else -float(other))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, Poly):
            f = float(other)
            if f == 0.0:
                return Poly()
            return Poly({k: c * f for k, c in self.terms.items()})
        out = Poly()
        for k1, c1 in self.terms.items():
            for k2, c2 in other.terms.items():
                key = tuple(sorted(k1 + k2))
                if len(key) > MAX_DEGREE:
                    raise ValueError(f"monomial degree {len(key)} exceeds {MAX_DEGREE}")
                out._iadd_term(key, c1 * c2)
        return out

    __rmul__ = __mul__

    def square(self) -> "Poly":
        return self * self

    def value(self, x) -> float:
        total = 0.0
        for k, c in self.terms.items():
            v = c
            for i in k:
                v *= x[i]
            total += v
        return total

    def gradient(self, x) -> dict[int, float]:
        g: dict[int, float] = {}
        for k, c in self.terms.items():
            n = len(k)
            if n == 0:
                continue
            for pos in range(n):
                i = k[pos]
                v = c
                for q in range(n):
                    if q != pos:
                        v *= x[k[q]]
                g[i] = g.get(i, 0.0) + v
        return g

    def hessian(self, x) -> dict[tuple[int, int], float]:
        """Upper-triangle entries (i <= j) of the Hessian at ``x``."""
        h: dict[tuple[int, int], float] = {}
        for k, c in self.terms.items():
            n = len(k)
            if n < 2:
                continue
            for p in range(n):
                for q in range(n):
                    if p == q:
                        continue
                    i, j = k[p], k[q]
                    if i > j:
                        continue
                    v = c
                    for r in range(n):
                        if r != p and r != q:
                            v *= x[k[r]]
                    h[(i, j)] = h.get((i, j), 0.0) + v
        return h

    def substitute(self, fixed: dict[int, float]) -> "Poly":
        """Replace the given variables by constants."""
        out = Poly()
        for k, c in self.terms.items():
            coef = c
            rest = []
            for i in k:
                if i in fixed:
                    coef *= fixed[i]
                else:
                    rest.append(i)
            if coef != 0.0:
                out._iadd_term(tuple(rest), coef)
        return out

    def remap(self, mapping: dict[int, int]) -> "Poly":
        """Renumber variable indices (e.g. after folding fixed variables)."""
        out = Poly()
        for k, c in self.terms.items():
            out._iadd_term(tuple(sorted(mapping[i] for i in k)), c)
        return out

    def variables(self) -> set[int]:
        return {i for k in self.terms for i in k}

    def __repr__(self):
        if not self.terms:
            return "Poly(0)"
        parts = []
        for k in sorted(self.terms, key=lambda t: (len(t), t)):
            c = self.terms[k]
            mon = "*".join(f"x{i}" for i in k) if k else ""
            parts.append(f"{c:+g}{'*' + mon if mon else ''}")
        return "Poly(" + " ".join(parts) + ")"


def det2(waa: Poly, wbb: Poly, wr: Poly, wi: Poly) -> Poly:
    """2x2 principal minor of a Hermitian block: waa*wbb - wr^2 - wi^2."""
    return waa * wbb - wr * wr - wi * wi


def det3(
    waa: Poly,
    wbb: Poly,
    wcc: Poly,
    wab_r: Poly,
    wab_i: Poly,
    wac_r: Poly,
    wac_i: Poly,
    wbc_r: Poly,
    wbc_i: Poly,
) -> Poly:
    """Symbolic 3x3 Hermitian determinant.

    Entries follow canonical orientation for sorted indices a < b < c:
    the (a,b) entry is wab_r + i*wab_i, etc. Expansion of

        det = a*b*c - a*|W_bc|^2 - b*|W_ac|^2 - c*|W_ab|^2
              + 2*Re(W_ab * W_bc * conj(W_ac))
    """
    x1, y1 = wab_r, wab_i
    x2, y2 = wac_r, wac_i
    x3, y3 = wbc_r, wbc_i
    out = waa * wbb * wcc
    out = out - waa * (x3 * x3 + y3 * y3)
    out = out - wbb * (x2 * x2 + y2 * y2)
    out = out - wcc * (x1 * x1 + y1 * y1)
    out = out + 2.0 * (x2 * (x1 * x3 - y1 * y3) + y2 * (x1 * y3 + y1 * x3))
    return out
