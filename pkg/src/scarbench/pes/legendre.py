"""Legendre-series potential backend and its coefficient-file format.

A series is an ordered list of radial coefficient curves v_lambda(R),
lambda = 0..LAMBDA, combined as

    V(R, theta) = sum_lambda P_lambda(cos theta) * v_lambda(R).

Curves are either named analytic forms or tabulated values interpolated
with a C^2 natural cubic spline (Hamilton's equations need continuous
first derivatives).

File format (plain text, '#' comments allowed)::

    legendre-series Λ=<int> r_unit=bohr e_unit=<hartree|cm-1>
    lambda 0
    analytic <named-form> <params...>
    lambda 1
    table <N>
    <R> <value>
    ...

Blocks must appear in strict order lambda = 0..Λ.  A block may carry
several ``analytic`` lines, which are summed; this superset keeps
literature surfaces expressible (long-range multipoles plus a
short-range exponential per lambda).  ``e_unit`` declares the unit of
the v_lambda values; evaluation always returns hartree.

Named forms (parameters positional):

==================  ====================================================
constant c          c
poly c0 c1 ...      c0 + c1*R + c2*R^2 + ...
exp-quad A B C      exp(-(A + B*R + C*R^2))
inv-power c p       c * R^(-p)
damped-inv-power    (1 - exp(-a*(R-r0)^2)) * c * R^(-p)   [r0 a c p]
morse D a R0        D * (1 - exp(-a*(R-R0)))^2
gauss c mu s        c * exp(-(R-mu)^2 / (2 s^2))
==================  ====================================================
"""

from __future__ import annotations

import io
from dataclasses import dataclass

import numpy as np
from scipy.interpolate import CubicSpline

from ..errors import CoefficientParseError
from ..units import CM_PER_HARTREE

_ENERGY_SCALES = {"hartree": 1.0, "cm-1": 1.0 / CM_PER_HARTREE}


class AnalyticCurve:
    """One named analytic radial form with value/first/second derivatives."""

    def __init__(self, form: str, params: list[float]):
        if form not in _FORM_ARITY:
            raise CoefficientParseError(f"unknown analytic form {form!r}")
        arity = _FORM_ARITY[form]
        if arity is not None and len(params) != arity:
            raise CoefficientParseError(
                f"form {form!r} takes {arity} parameters, got {len(params)}"
            )
        if arity is None and not params:
            raise CoefficientParseError(f"form {form!r} needs at least one parameter")
        self.form = form
        self.params = [float(p) for p in params]

    def __call__(self, R, order: int = 0):
        return _FORM_EVAL[self.form](np.asarray(R, dtype=float), self.params, order)

    def __eq__(self, other):
        return (
            isinstance(other, AnalyticCurve)
            and self.form == other.form
            and self.params == other.params
        )


def _eval_constant(R, p, order):
    (c,) = p
    return np.full_like(R, c) if order == 0 else np.zeros_like(R)


def _eval_poly(R, p, order):
    coeffs = np.polynomial.polynomial.Polynomial(p)
    return coeffs.deriv(order)(R) if order else coeffs(R)


def _eval_expquad(R, p, order):
    a, b, c = p
    v = np.exp(-(a + b * R + c * R**2))
    g = -(b + 2 * c * R)
    if order == 0:
        return v
    if order == 1:
        return g * v
    return (g * g - 2 * c) * v


def _eval_invpower(R, p, order):
    c, q = p
    if order == 0:
        return c * R ** (-q)
    if order == 1:
        return -q * c * R ** (-q - 1)
    return q * (q + 1) * c * R ** (-q - 2)


def _eval_damped_invpower(R, p, order):
    r0, a, c, q = p
    u = R - r0
    e = np.exp(-a * u * u)
    f = 1.0 - e
    fp = 2 * a * u * e
    fpp = (2 * a - 4 * a * a * u * u) * e
    g = _eval_invpower(R, [c, q], 0)
    gp = _eval_invpower(R, [c, q], 1)
    gpp = _eval_invpower(R, [c, q], 2)
    if order == 0:
        return f * g
    if order == 1:
        return fp * g + f * gp
    return fpp * g + 2 * fp * gp + f * gpp


def _eval_morse(R, p, order):
    d, a, r0 = p
    e = np.exp(-a * (R - r0))
    if order == 0:
        return d * (1 - e) ** 2
    if order == 1:
        return 2 * d * a * (1 - e) * e
    return 2 * d * a * a * e * (2 * e - 1)


def _eval_gauss(R, p, order):
    c, mu, s = p
    u = (R - mu) / s
    v = c * np.exp(-0.5 * u * u)
    if order == 0:
        return v
    if order == 1:
        return -u / s * v
    return (u * u - 1) / s**2 * v


_FORM_ARITY = {
    "constant": 1,
    "poly": None,
    "exp-quad": 3,
    "inv-power": 2,
    "damped-inv-power": 4,
    "morse": 3,
    "gauss": 3,
}
_FORM_EVAL = {
    "constant": _eval_constant,
    "poly": _eval_poly,
    "exp-quad": _eval_expquad,
    "inv-power": _eval_invpower,
    "damped-inv-power": _eval_damped_invpower,
    "morse": _eval_morse,
    "gauss": _eval_gauss,
}


class TabulatedCurve:
    """Radial values on a strictly increasing grid, natural cubic spline."""

    def __init__(self, R: np.ndarray, values: np.ndarray):
        R = np.asarray(R, dtype=float)
        values = np.asarray(values, dtype=float)
        if R.ndim != 1 or R.size < 4:
            raise CoefficientParseError("table needs at least 4 points")
        if np.any(np.diff(R) <= 0):
            raise CoefficientParseError("table R grid must be strictly increasing")
        self.R = R
        self.values = values
        self._spline = CubicSpline(R, values, bc_type="natural")
        self._d1 = self._spline.derivative(1)
        self._d2 = self._spline.derivative(2)

    def __call__(self, R, order: int = 0):
        R = np.asarray(R, dtype=float)
        if order == 0:
            return self._spline(R)
        return (self._d1 if order == 1 else self._d2)(R)

    def __eq__(self, other):
        return (
            isinstance(other, TabulatedCurve)
            and np.array_equal(self.R, other.R)
            and np.array_equal(self.values, other.values)
        )


class SummedCurve:
    """Sum of analytic curves within one lambda block."""

    def __init__(self, terms: list[AnalyticCurve]):
        self.terms = terms

    def __call__(self, R, order: int = 0):
        R = np.asarray(R, dtype=float)
        out = np.zeros_like(R)
        for term in self.terms:
            out = out + term(R, order)
        return out

    def __eq__(self, other):
        return isinstance(other, SummedCurve) and self.terms == other.terms


def legendre_table(lmax: int, x):
    """P_lambda(x), dP/dx and d2P/dx2 for lambda = 0..lmax, by recurrence.

    The derivative recurrences P'_{l+1} = P'_{l-1} + (2l+1) P_l (and its
    derivative) stay regular at x = +-1, unlike the (1-x^2) forms.
    """
    x = np.asarray(x, dtype=float)
    P = np.empty((lmax + 1,) + x.shape)
    dP = np.empty_like(P)
    d2P = np.empty_like(P)
    P[0], dP[0], d2P[0] = 1.0, 0.0, 0.0
    if lmax >= 1:
        P[1], dP[1], d2P[1] = x, 1.0, 0.0
    for l in range(1, lmax):
        P[l + 1] = ((2 * l + 1) * x * P[l] - l * P[l - 1]) / (l + 1)
        dP[l + 1] = dP[l - 1] + (2 * l + 1) * P[l]
        d2P[l + 1] = d2P[l - 1] + (2 * l + 1) * dP[l]
    return P, dP, d2P


@dataclass
class LegendreSeries:
    """Ordered radial coefficient curves, lambda = 0..len(curves)-1."""

    curves: list
    e_unit: str = "hartree"

    def __post_init__(self):
        if not self.curves:
            raise CoefficientParseError("series must contain at least lambda=0")
        if self.e_unit not in _ENERGY_SCALES:
            raise CoefficientParseError(f"unknown energy unit {self.e_unit!r}")
        self.scale = _ENERGY_SCALES[self.e_unit]

    @property
    def lmax(self) -> int:
        return len(self.curves) - 1

    def coefficient(self, lam: int, R, order: int = 0):
        """v_lambda(R) (or its R-derivative) in hartree."""
        return self.scale * self.curves[lam](R, order)

    def tabulated_range(self):
        """Intersection of table domains, or None if fully analytic."""
        lo, hi = None, None
        for curve in self.curves:
            if isinstance(curve, TabulatedCurve):
                lo = curve.R[0] if lo is None else max(lo, curve.R[0])
                hi = curve.R[-1] if hi is None else min(hi, curve.R[-1])
        return None if lo is None else (lo, hi)


def load_coefficients(source) -> LegendreSeries:
    """Parse a coefficient file (path, file object, or text) into a series."""
    if hasattr(source, "read"):
        text = source.read()
    else:
        try:
            text = open(source, "r", encoding="utf-8").read()
        except (OSError, ValueError):
            if isinstance(source, str) and "legendre-series" in source:
                text = source
            else:
                raise
    lines = text.splitlines()

    def significant(start):
        for i in range(start, len(lines)):
            stripped = lines[i].split("#", 1)[0].strip()
            if stripped:
                yield i, stripped

    stream = significant(0)
    try:
        header_no, header = next(stream)
    except StopIteration:
        raise CoefficientParseError("empty coefficient file") from None
    tokens = header.split()
    if not tokens or tokens[0] != "legendre-series":
        raise CoefficientParseError("expected 'legendre-series' header", header_no + 1)
    lam_max = None
    e_unit = None
    r_unit = None
    for tok in tokens[1:]:
        if "=" not in tok:
            raise CoefficientParseError(f"bad header token {tok!r}", header_no + 1)
        key, value = tok.split("=", 1)
        if key in ("Λ", "lambda"):
            lam_max = int(value)
        elif key == "r_unit":
            r_unit = value
        elif key == "e_unit":
            e_unit = value
        else:
            raise CoefficientParseError(f"unknown header key {key!r}", header_no + 1)
    if lam_max is None or lam_max < 0:
        raise CoefficientParseError("header must declare Λ=<int> >= 0", header_no + 1)
    if r_unit != "bohr":
        raise CoefficientParseError("r_unit must be 'bohr'", header_no + 1)
    if e_unit not in _ENERGY_SCALES:
        raise CoefficientParseError(
            f"e_unit must be one of {sorted(_ENERGY_SCALES)}", header_no + 1
        )

    curves: list = []
    expected = 0
    pending_analytic: list[AnalyticCurve] = []
    pending_line = header_no + 1

    def close_block():
        nonlocal pending_analytic
        if expected > 0 or pending_analytic:
            if not pending_analytic:
                raise CoefficientParseError(
                    f"lambda {expected - 1} block has no payload", pending_line
                )
            curves.append(
                pending_analytic[0]
                if len(pending_analytic) == 1
                else SummedCurve(pending_analytic)
            )
            pending_analytic = []

    rows_left = 0
    table_R: list[float] = []
    table_v: list[float] = []
    for lineno, stripped in stream:
        if rows_left:
            parts = stripped.split()
            if len(parts) != 2:
                raise CoefficientParseError("table row must be 'R value'", lineno + 1)
            table_R.append(float(parts[0]))
            table_v.append(float(parts[1]))
            rows_left -= 1
            if rows_left == 0:
                try:
                    curves.append(TabulatedCurve(np.array(table_R), np.array(table_v)))
                except CoefficientParseError as exc:
                    raise CoefficientParseError(str(exc), lineno + 1) from None
            continue
        parts = stripped.split()
        keyword = parts[0]
        if keyword == "lambda":
            if len(parts) != 2:
                raise CoefficientParseError("expected 'lambda <int>'", lineno + 1)
            close_block()
            lam = int(parts[1])
            if lam != len(curves):
                raise CoefficientParseError(
                    f"expected lambda {len(curves)}, got {lam} "
                    "(blocks must be ordered 0..Λ with no gaps)",
                    lineno + 1,
                )
            if lam > lam_max:
                raise CoefficientParseError(
                    f"lambda {lam} exceeds declared Λ={lam_max}", lineno + 1
                )
            expected = lam + 1
            pending_line = lineno + 1
        elif keyword == "analytic":
            if expected == 0 and not curves:
                raise CoefficientParseError("payload before any 'lambda'", lineno + 1)
            try:
                pending_analytic.append(AnalyticCurve(parts[1], [float(p) for p in parts[2:]]))
            except IndexError:
                raise CoefficientParseError("analytic line missing form name", lineno + 1)
            except CoefficientParseError as exc:
                raise CoefficientParseError(str(exc), lineno + 1) from None
        elif keyword == "table":
            if pending_analytic:
                raise CoefficientParseError(
                    "block mixes 'analytic' and 'table'", lineno + 1
                )
            if len(parts) != 2:
                raise CoefficientParseError("expected 'table <N>'", lineno + 1)
            rows_left = int(parts[1])
            if rows_left < 4:
                raise CoefficientParseError("table needs at least 4 points", lineno + 1)
            table_R, table_v = [], []
        else:
            raise CoefficientParseError(f"unexpected keyword {keyword!r}", lineno + 1)
    if rows_left:
        raise CoefficientParseError(f"table truncated, {rows_left} rows missing")
    close_block()
    if len(curves) != lam_max + 1:
        raise CoefficientParseError(
            f"declared Λ={lam_max} but found {len(curves)} blocks "
            f"(missing lambda={len(curves)})"
        )
    return LegendreSeries(curves, e_unit=e_unit)


def write_coefficients(series: LegendreSeries, destination=None) -> str:
    """Serialize a series in canonical form; returns the text."""
    out = io.StringIO()
    out.write(f"legendre-series Λ={series.lmax} r_unit=bohr e_unit={series.e_unit}\n")
    for lam, curve in enumerate(series.curves):
        out.write(f"lambda {lam}\n")
        terms = curve.terms if isinstance(curve, SummedCurve) else [curve]
        for term in terms:
            if isinstance(term, AnalyticCurve):
                params = " ".join(repr(p) for p in term.params)
                out.write(f"analytic {term.form} {params}\n")
            elif isinstance(term, TabulatedCurve):
                out.write(f"table {term.R.size}\n")
                for r, v in zip(term.R, term.values):
                    out.write(f"{r!r} {v!r}\n")
            else:
                raise TypeError(f"cannot serialize curve {term!r}")
    text = out.getvalue()
    if destination is not None:
        if hasattr(destination, "write"):
            destination.write(text)
        else:
            with open(destination, "w", encoding="utf-8") as fh:
                fh.write(text)
    return text
