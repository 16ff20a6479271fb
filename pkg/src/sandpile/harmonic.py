"""Integer bivariate polynomials that are harmonic for the lattice Laplacian.

The basis set spans the discretely harmonic polynomials of order four or
less (two per order above zero), plus one order-five field used for a short
look beyond. The lattice Laplacian differs from the continuous one, so some
entries carry lower-order corrections; checks here are exact integer
arithmetic, never floating point.

Pointwise minima of harmonic fields are no longer harmonic but satisfy
laplacian <= 0 everywhere (min-plus arithmetic); they are represented as
sampled :class:`DiscreteField` windows rather than symbolically.
"""

import re
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

_INT64_SAFE = 1 << 61  # headroom so a global shift cannot overflow int64


@dataclass(frozen=True)
class HarmonicPolynomial:
    """Sparse bivariate polynomial sum(coef * i^pi * j^pj), exact arithmetic."""

    terms: tuple
    label: str = ""
    harmonic: bool = False

    def evaluate(self, i, j):
        return sum(coef * i ** pi * j ** pj for coef, pi, pj in self.terms)

    def evaluate_window(self, imin, imax, jmin, jmax):
        """Dense values on a lattice window, rows j ascending.

        Uses int64 when a bound on the intermediates proves it safe,
        otherwise falls back to exact Python integers (object dtype).
        """
        mi = max(abs(imin), abs(imax), 1)
        mj = max(abs(jmin), abs(jmax), 1)
        bound = sum(abs(coef) * mi ** pi * mj ** pj
                    for coef, pi, pj in self.terms)
        exact_ints = all(
            isinstance(coef, int) or (isinstance(coef, Fraction)
                                      and coef.denominator == 1)
            for coef, _, _ in self.terms)
        if exact_ints and bound < _INT64_SAFE:
            iv = np.arange(imin, imax + 1, dtype=np.int64)
            jv = np.arange(jmin, jmax + 1, dtype=np.int64)
            acc = np.zeros((jv.size, iv.size), np.int64)
            for coef, pi, pj in self.terms:
                acc += int(coef) * (jv ** pj)[:, None] * (iv ** pi)[None, :]
            return acc
        iv = np.arange(imin, imax + 1, dtype=object)
        jv = np.arange(jmin, jmax + 1, dtype=object)
        acc = np.zeros((jv.size, iv.size), object)
        for coef, pi, pj in self.terms:
            acc = acc + coef * (jv ** pj)[:, None] * (iv ** pi)[None, :]
        return acc

    def order(self):
        return max((pi + pj for _, pi, pj in self.terms), default=0)

    def is_integer_valued(self):
        return all(Fraction(coef).denominator == 1 for coef, _, _ in self.terms)

    def __str__(self):
        return self.label or _format_terms(self.terms)


def _canonical(term_map, label, harmonic):
    terms = tuple(sorted(
        ((coef, pi, pj) for (pi, pj), coef in term_map.items() if coef != 0),
        key=lambda t: (t[1] + t[2], t[1], t[2])))
    return HarmonicPolynomial(terms, label, harmonic)


def polynomial(term_list, label="", harmonic=False):
    term_map = {}
    for coef, pi, pj in term_list:
        if pi < 0 or pj < 0:
            raise ValueError("negative powers are not allowed")
        key = (pi, pj)
        term_map[key] = term_map.get(key, 0) + coef
    return _canonical(term_map, label, harmonic)


def _format_terms(terms):
    if not terms:
        return "0"
    parts = []
    for coef, pi, pj in terms:
        body = "".join([f"i^{pi}" if pi else "", f"j^{pj}" if pj else ""])
        parts.append(f"{coef}" + ("*" + body if body else ""))
    return "+".join(parts).replace("+-", "-")


_BASIS_TERMS = {
    "0": [(1, 0, 0)],
    "1a": [(1, 1, 0)],
    "1b": [(1, 0, 1)],
    "2a": [(1, 1, 1)],
    "2b": [(1, 2, 0), (-1, 0, 2)],
    "3a": [(1, 3, 0), (-3, 1, 2)],
    "3b": [(1, 0, 3), (-3, 2, 1)],
    "4a": [(1, 4, 0), (-6, 2, 2), (1, 0, 4), (-1, 2, 0), (-1, 0, 2)],
    "4b": [(1, 3, 1), (-1, 1, 3)],
    "5a": [(3, 5, 0), (-30, 3, 2), (15, 1, 4), (-10, 3, 0)],
}

BASIS_IDS = tuple(_BASIS_TERMS)


def basis(ident):
    """One of the named harmonic fields: 0, 1a..4b (the basis) plus 5a."""
    key = str(ident).strip().lower().removeprefix("h")
    if key not in _BASIS_TERMS:
        valid = ", ".join("H" + b for b in BASIS_IDS)
        raise ValueError(f"unknown harmonic id {ident!r}; valid ids: {valid}")
    return polynomial(_BASIS_TERMS[key], label=f"H{key}", harmonic=True)


def linear_combine(coeffs):
    """Integer (or rational) linear combination of polynomials."""
    term_map = {}
    harmonic = True
    labels = []
    for k, poly in coeffs:
        harmonic = harmonic and poly.harmonic
        labels.append(f"{k}*{poly}")
        for coef, pi, pj in poly.terms:
            key = (pi, pj)
            term_map[key] = term_map.get(key, 0) + k * coef
    return _canonical(term_map, "+".join(labels) if labels else "0", harmonic)


def window_laplacian(values):
    """Lattice Laplacian of a sampled window; valid on the interior only."""
    core = values[1:-1, 1:-1]
    return (values[1:-1, 2:] + values[1:-1, :-2]
            + values[2:, 1:-1] + values[:-2, 1:-1] - 4 * core)


def check_harmonic(poly, radius):
    """True iff the lattice Laplacian vanishes for all |i|, |j| <= radius."""
    if radius < 1:
        raise ValueError("radius must be >= 1")
    r = radius + 1
    values = poly.evaluate_window(-r, r, -r, r)
    lap = window_laplacian(values)
    return bool((lap == 0).all())


# ---------------------------------------------------------------------------
# tropical (min-plus) combinations


@dataclass
class DiscreteField:
    """Integer scalar field sampled on a lattice window, rows j ascending."""

    imin: int
    imax: int
    jmin: int
    jmax: int
    values: np.ndarray
    label: str = ""
    superharmonic: bool = False

    def covers(self, imin, imax, jmin, jmax):
        return (self.imin <= imin and self.imax >= imax
                and self.jmin <= jmin and self.jmax >= jmax)

    def value_at(self, i, j):
        return self.values[j - self.jmin, i - self.imin]

    def subwindow(self, imin, imax, jmin, jmax):
        if not self.covers(imin, imax, jmin, jmax):
            raise ValueError("requested window exceeds the sampled field")
        return self.values[jmin - self.jmin:jmax - self.jmin + 1,
                           imin - self.imin:imax - self.imin + 1]


def _resolve_window(window):
    if hasattr(window, "window"):
        return window.window()
    imin, imax, jmin, jmax = window
    if imin > imax or jmin > jmax:
        raise ValueError("empty window")
    return int(imin), int(imax), int(jmin), int(jmax)


def tropical_min(fields, window):
    """Pointwise minimum of constant-shifted harmonic polynomials.

    ``fields`` is a list of (polynomial, offset) pairs; the result samples
    min_k (h_k + c_k) on the window. Minima of harmonic fields satisfy
    laplacian <= 0 at every interior point, which is verified exactly.
    """
    if not fields:
        raise ValueError("tropical_min needs at least one field")
    imin, imax, jmin, jmax = _resolve_window(window)
    acc = None
    labels = []
    for poly, offset in fields:
        vals = poly.evaluate_window(imin, imax, jmin, jmax)
        if vals.dtype == np.int64:
            vals = vals + np.int64(offset)
        else:
            vals = vals + offset
        labels.append(f"{poly}{offset:+d}" if offset else str(poly))
        acc = vals if acc is None else np.minimum(acc, vals)
    lap = window_laplacian(acc)
    if not (lap <= 0).all():
        raise ValueError("pointwise minimum is not super-harmonic; "
                         "are all inputs harmonic?")
    return DiscreteField(imin, imax, jmin, jmax, acc,
                         label="min(" + ", ".join(labels) + ")",
                         superharmonic=True)


def partition_fields(domain, k=None, offsets=None):
    """The four shifted fields ij, -3ij, k*i, -3k*i of the partition demo.

    The source material fixes the fields (k = 128 on a 255x255 square) but
    not the constant offsets, describing only the intended picture: half
    width columns, left column split roughly 3:1 in height. The defaults are
    a documented reconstruction: the ij / -3ij crease is the hyperbola
    i*j = (N//4)^2 through the left column's 3:1 line, and -3k*i takes the
    right half. A strict four-rectangle split is unrealizable with these
    fields under pointwise min (the two first-order fields can only meet in
    a vertical crease), so k*i is given an offset that keeps it dominated.
    """
    n = max(domain.width, domain.height)
    if k is None:
        k = (n + 1) // 2
    if offsets is None:
        c1 = 0
        c2 = 4 * (n // 4) ** 2
        c4 = 0
        c3 = c4 + 4 * k * (n // 2)
    else:
        c1, c2, c3, c4 = offsets
    return [(basis("2a"), c1),
            (linear_combine([(-3, basis("2a"))]), c2),
            (linear_combine([(k, basis("1a"))]), c3),
            (linear_combine([(-3 * k, basis("1a"))]), c4)]


# ---------------------------------------------------------------------------
# CLI polynomial syntax: comma-separated monomials like "2*i^3*j" or presets


_MONO_RE = re.compile(
    r"^\s*(?P<coef>[+-]?\d+(?:/\d+)?)?\s*"
    r"(?P<body>(?:\*?\s*[ij](?:\^\d+)?\s*)*)$")


def parse_polynomial(text):
    """Parse a preset name (H2a) or monomial list (``1*i^1*j^1, -2*j``)."""
    text = text.strip()
    low = text.lower().removeprefix("h")
    if low in _BASIS_TERMS:
        return basis(low)
    terms = []
    for chunk in text.split(","):
        m = _MONO_RE.match(chunk)
        if not m or not chunk.strip():
            raise ValueError(f"bad monomial {chunk!r}")
        coef_text = m.group("coef")
        coef = 1 if coef_text in (None, "", "+") else (
            -1 if coef_text == "-" else Fraction(coef_text))
        if isinstance(coef, Fraction) and coef.denominator == 1:
            coef = int(coef)
        pi = pj = 0
        for var, exp in re.findall(r"([ij])(?:\^(\d+))?", m.group("body")):
            e = int(exp) if exp else 1
            if var == "i":
                pi += e
            else:
                pj += e
        terms.append((coef, pi, pj))
    if not terms:
        raise ValueError(f"empty polynomial {text!r}")
    poly = polynomial(terms, label=text)
    return HarmonicPolynomial(poly.terms, text, check_harmonic(poly, 8))
