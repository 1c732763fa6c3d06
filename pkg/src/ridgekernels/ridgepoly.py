"""Sparse multivariate polynomials over exact rationals, and the membership
machinery for products of ridge functions.

Polynomials live in 2n variables split as x = (x_1..x_n), y = (y_1..y_n).
The plane family L = {(alpha*w, beta*w) : w in R^n} supports three linked
questions: which polynomials vanish on L, a spanning binomial basis for the
vanishing space in each degree, and whether a homogeneous polynomial is
annihilated by every vanishing polynomial acting as a differential operator
(the closure membership test for spans of ridge products).

All coefficients are Fractions; zero tests are exact, never floating.
"""

from __future__ import annotations

import itertools
import math
import re
from fractions import Fraction

import numpy as np

MultiIndex = tuple  # nonnegative integer exponents


class MPoly:
    """Sparse polynomial: map from exponent multiindex to nonzero Fraction."""

    __slots__ = ("n_vars", "terms")

    def __init__(self, n_vars: int, terms=None):
        self.n_vars = int(n_vars)
        self.terms: dict[MultiIndex, Fraction] = {}
        if terms:
            for mono, coeff in dict(terms).items():
                self._add_term(mono, coeff)

    def _add_term(self, mono: MultiIndex, coeff) -> None:
        mono = tuple(int(e) for e in mono)
        if len(mono) != self.n_vars or any(e < 0 for e in mono):
            raise ValueError(f"bad multiindex {mono} for {self.n_vars} variables")
        coeff = Fraction(coeff)
        if coeff == 0:
            return
        new = self.terms.get(mono, Fraction(0)) + coeff
        if new == 0:
            self.terms.pop(mono, None)
        else:
            self.terms[mono] = new

    # -- construction helpers -------------------------------------------------

    @classmethod
    def zero(cls, n_vars: int) -> "MPoly":
        return cls(n_vars)

    @classmethod
    def constant(cls, n_vars: int, value) -> "MPoly":
        return cls(n_vars, {(0,) * n_vars: value})

    @classmethod
    def monomial(cls, n_vars: int, mono: MultiIndex, coeff=1) -> "MPoly":
        return cls(n_vars, {tuple(mono): coeff})

    @classmethod
    def linear_form(cls, coeffs) -> "MPoly":
        """The polynomial <z, a> for a rational vector a."""
        coeffs = list(coeffs)
        n = len(coeffs)
        p = cls(n)
        for i, a in enumerate(coeffs):
            mono = tuple(1 if j == i else 0 for j in range(n))
            p._add_term(mono, a)
        return p

    # -- arithmetic ------------------------------------------------------------

    def _check_compatible(self, other: "MPoly") -> None:
        if self.n_vars != other.n_vars:
            raise ValueError(f"variable counts differ: {self.n_vars} vs {other.n_vars}")

    def __add__(self, other: "MPoly") -> "MPoly":
        self._check_compatible(other)
        out = MPoly(self.n_vars, self.terms)
        for mono, coeff in other.terms.items():
            out._add_term(mono, coeff)
        return out

    def __neg__(self) -> "MPoly":
        return MPoly(self.n_vars, {m: -c for m, c in self.terms.items()})

    def __sub__(self, other: "MPoly") -> "MPoly":
        return self + (-other)

    def __mul__(self, other: "MPoly") -> "MPoly":
        self._check_compatible(other)
        out = MPoly(self.n_vars)
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                mono = tuple(a + b for a, b in zip(m1, m2))
                out._add_term(mono, c1 * c2)
        return out

    def scale(self, factor) -> "MPoly":
        factor = Fraction(factor)
        return MPoly(self.n_vars, {m: c * factor for m, c in self.terms.items()})

    def __pow__(self, k: int) -> "MPoly":
        if k < 0:
            raise ValueError("negative power")
        out = MPoly.constant(self.n_vars, 1)
        for _ in range(k):
            out = out * self
        return out

    def __eq__(self, other) -> bool:
        return isinstance(other, MPoly) and self.n_vars == other.n_vars and self.terms == other.terms

    def __hash__(self):
        return hash((self.n_vars, frozenset(self.terms.items())))

    # -- queries ---------------------------------------------------------------

    def is_zero(self) -> bool:
        return not self.terms

    def degree(self) -> int:
        """Total degree; the zero polynomial reports -1."""
        return max((sum(m) for m in self.terms), default=-1)

    def is_homogeneous(self) -> bool:
        degs = {sum(m) for m in self.terms}
        return len(degs) <= 1

    def homogeneous_components(self) -> dict[int, "MPoly"]:
        parts: dict[int, MPoly] = {}
        for mono, coeff in self.terms.items():
            k = sum(mono)
            parts.setdefault(k, MPoly(self.n_vars))._add_term(mono, coeff)
        return parts

    def eval_many(self, points: np.ndarray) -> np.ndarray:
        """Float values at each row of points (shape (p, n_vars))."""
        points = np.atleast_2d(np.asarray(points, dtype=float))
        vals = np.zeros(points.shape[0])
        for mono, coeff in self.terms.items():
            vals += float(coeff) * np.prod(points ** np.asarray(mono), axis=1)
        return vals

    def eval_scale(self, points: np.ndarray) -> np.ndarray:
        """Sum of absolute term magnitudes at each point (cancellation scale)."""
        points = np.atleast_2d(np.asarray(points, dtype=float))
        vals = np.zeros(points.shape[0])
        for mono, coeff in self.terms.items():
            vals += abs(float(coeff)) * np.prod(np.abs(points) ** np.asarray(mono), axis=1)
        return vals

    def __repr__(self) -> str:
        if not self.terms:
            return "0"
        n = self.n_vars // 2 if self.n_vars % 2 == 0 else self.n_vars
        parts = []
        for mono in sorted(self.terms, reverse=True):
            coeff = self.terms[mono]
            factors = []
            for i, e in enumerate(mono):
                if e == 0:
                    continue
                if self.n_vars % 2 == 0:
                    name = f"x{i + 1}" if i < n else f"y{i - n + 1}"
                else:
                    name = f"z{i + 1}"
                factors.append(name if e == 1 else f"{name}^{e}")
            body = " ".join(factors) or "1"
            parts.append(f"{coeff}*{body}" if abs(coeff) != 1 or body == "1" else
                         ("-" if coeff < 0 else "") + body)
        return " + ".join(parts).replace("+ -", "- ")


# -- multiindex bookkeeping ------------------------------------------------


def split_pair(mono: MultiIndex, n: int):
    """Split an exponent over 2n variables into its x part and y part."""
    if len(mono) != 2 * n:
        raise ValueError(f"multiindex length {len(mono)} is not 2n for n={n}")
    return tuple(mono[:n]), tuple(mono[n:])


def pair_to_box(mbar: MultiIndex, munder: MultiIndex):
    """The index map (mbar, munder) -> (mbar, mbar + munder)."""
    return tuple(mbar), tuple(a + b for a, b in zip(mbar, munder))


def box_to_pair(mbar: MultiIndex, s: MultiIndex):
    """Inverse map (mbar, s) -> (mbar, s - mbar)."""
    munder = tuple(b - a for a, b in zip(mbar, s))
    if any(e < 0 for e in munder):
        raise ValueError(f"{mbar} is not dominated by {s}")
    return tuple(mbar), munder


def enumerate_delta(s: MultiIndex, l: int) -> list:
    """All multiindices dominated by s with component sum l, lex ordered."""
    s = tuple(int(e) for e in s)
    if any(e < 0 for e in s):
        raise ValueError(f"s must be componentwise nonnegative, got {s}")
    if not 0 <= l <= sum(s):
        raise ValueError(f"l = {l} outside [0, |s|] = [0, {sum(s)}]")
    members = [
        m for m in itertools.product(*(range(e + 1) for e in s)) if sum(m) == l
    ]
    return sorted(members)


def _compositions(total: int, parts: int):
    """All tuples of `parts` nonnegative integers summing to `total`."""
    if parts == 1:
        yield (total,)
        return
    for head in range(total + 1):
        for rest in _compositions(total - head, parts - 1):
            yield (head,) + rest


# -- vanishing space on the plane family ------------------------------------


def vanishing_basis(n: int, k: int) -> list[MPoly]:
    """Spanning binomials for the degree-k polynomials vanishing on L.

    For every x-exponent budget s with |s| = k and every split 0 < l < k
    whose index box holds more than one element, the lexicographically
    smallest element is paired against each other element m, producing
    x^kappa y^(s-kappa) - x^m y^(s-m).
    """
    if n < 2:
        raise ValueError("the construction requires n >= 2 variables per block")
    if k < 2:
        raise ValueError("degree must be >= 2")
    basis = []
    for s in _compositions(k, n):
        for l in range(1, k):
            delta = enumerate_delta(s, l)
            if len(delta) <= 1:
                continue
            kappa = delta[0]
            lead = kappa + tuple(si - ki for si, ki in zip(s, kappa))
            for m in delta[1:]:
                trail = m + tuple(si - mi for si, mi in zip(s, m))
                basis.append(MPoly(2 * n, {lead: 1, trail: -1}))
    return basis


def vanishes_on_L(p: MPoly) -> bool:
    """Exact test that p vanishes identically on the planes (alpha*w, beta*w).

    Each homogeneous part vanishes iff, for every exponent budget s and
    every split level l, the coefficients mapping to (s, l) sum to zero;
    the sums are exact rationals.
    """
    if p.n_vars % 2 != 0:
        raise ValueError("polynomial must have an even variable count (x and y blocks)")
    n = p.n_vars // 2
    for part in p.homogeneous_components().values():
        groups: dict[tuple, Fraction] = {}
        for mono, coeff in part.terms.items():
            mbar, munder = split_pair(mono, n)
            _, s = pair_to_box(mbar, munder)
            key = (s, sum(mbar))
            groups[key] = groups.get(key, Fraction(0)) + coeff
        if any(v != 0 for v in groups.values()):
            return False
    return True


def failing_group(p: MPoly):
    """The first (s, l, coefficient-sum) with nonzero sum, or None."""
    n = p.n_vars // 2
    for part in p.homogeneous_components().values():
        groups: dict[tuple, Fraction] = {}
        for mono, coeff in part.terms.items():
            mbar, munder = split_pair(mono, n)
            _, s = pair_to_box(mbar, munder)
            key = (s, sum(mbar))
            groups[key] = groups.get(key, Fraction(0)) + coeff
        for (s, l), total in sorted(groups.items()):
            if total != 0:
                return s, l, total
    return None


# -- differential operators --------------------------------------------------


def _diff_mono(mono: MultiIndex, order: MultiIndex):
    """Apply d^order to a monomial; returns (factor, new multiindex) or None."""
    if any(o > e for o, e in zip(order, mono)):
        return None
    factor = 1
    new = []
    for e, o in zip(mono, order):
        factor *= math.factorial(e) // math.factorial(e - o)
        new.append(e - o)
    return factor, tuple(new)


def apply_diff(p: MPoly, q: MPoly) -> MPoly:
    """The polynomial p(D) q = sum_m p_m * d^|m| q / dz^m, computed exactly."""
    p._check_compatible(q)
    out = MPoly(q.n_vars)
    for order, pc in p.terms.items():
        for mono, qc in q.terms.items():
            hit = _diff_mono(mono, order)
            if hit is None:
                continue
            factor, new = hit
            out._add_term(new, pc * qc * factor)
    return out


def in_closure_homogeneous(q: MPoly) -> bool:
    """Membership of a homogeneous polynomial in the ridge-product closure.

    True iff every vanishing-basis binomial of matching degree annihilates q
    as a differential operator.  Degrees below 2 carry no constraints.
    """
    if q.n_vars % 2 != 0 or q.n_vars < 4:
        raise ValueError("expected at least 4 variables split into x and y blocks")
    if not q.is_homogeneous():
        raise ValueError("polynomial is not homogeneous; decompose first")
    if q.is_zero():
        return True
    n = q.n_vars // 2
    k = q.degree()
    if k < 2:
        return True
    return all(apply_diff(b, q).is_zero() for b in vanishing_basis(n, k))


def membership_witness(q: MPoly):
    """A vanishing binomial b with b(D) q != 0, plus the residue, or None."""
    n = q.n_vars // 2
    k = q.degree()
    if k < 2:
        return None
    for b in vanishing_basis(n, k):
        res = apply_diff(b, q)
        if not res.is_zero():
            return b, res
    return None


# -- text grammar ------------------------------------------------------------

_TERM_RE = re.compile(
    r"(?P<sign>[+-])?\s*(?P<coef>\d+(?:\.\d+)?(?:/\d+)?)?\s*\*?\s*"
    r"(?P<body>(?:[xy]\d+(?:\^\d+)?\s*)*)"
)
_FACTOR_RE = re.compile(r"([xy])(\d+)(?:\^(\d+))?")


def parse_mpoly(text: str, n: int | None = None) -> MPoly:
    """Parse the grammar ``coef * x1^a x2^b y1^c y2^d +/- ...``.

    Variables are x1..xn and y1..yn; n defaults to the largest index seen
    (at least 2).  Coefficients may be integers, decimals, or fractions.
    """
    cleaned = text.strip()
    if not cleaned:
        raise ValueError("empty polynomial expression")
    chunks = re.split(r"(?=[+-])(?![^(]*\))", cleaned.replace("−", "-"))
    parsed = []
    max_idx = 0
    for chunk in chunks:
        chunk = chunk.strip()
        if not chunk:
            continue
        m = _TERM_RE.fullmatch(chunk)
        if not m or (m.group("coef") is None and not m.group("body").strip()):
            raise ValueError(f"cannot parse term {chunk!r}")
        coeff = Fraction((m.group("sign") or "") + (m.group("coef") or "1"))
        factors = []
        for var, idx, exp in _FACTOR_RE.findall(m.group("body")):
            idx = int(idx)
            exp = int(exp) if exp else 1
            if idx < 1:
                raise ValueError(f"variable index must be >= 1 in {chunk!r}")
            max_idx = max(max_idx, idx)
            factors.append((var, idx, exp))
        parsed.append((coeff, factors))
    if n is None:
        n = max(max_idx, 2)
    elif max_idx > n:
        raise ValueError(f"expression uses index {max_idx} beyond n={n}")
    poly = MPoly(2 * n)
    for coeff, factors in parsed:
        mono = [0] * (2 * n)
        for var, idx, exp in factors:
            pos = idx - 1 if var == "x" else n + idx - 1
            mono[pos] += exp
        poly._add_term(tuple(mono), coeff)
    return poly
