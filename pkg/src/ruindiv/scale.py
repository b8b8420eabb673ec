"""Scale functions ``W``, ``Z`` and ``Zbar`` of a spectrally negative model.

All heavy lifting happens on the *scaled* functions ``exp(-Phi x) W^(n)(x)``,
``exp(-Phi x) Z(x)`` and ``exp(-Phi x) Zbar(x)``, which stay bounded.  The
combinations that cancel the exponential growth exactly are computed in their
own right rather than by subtracting two large numbers::

    k_bar(x)          = Z(x) - q W(x) / Phi
    growth_defect(x)  = W'(x) - Phi W(x)
    zbar_defect(x)    = Zbar(x) - Z(x) / Phi

Three backends exist: partial fractions for rational transforms (exponential
or integer-shape gamma claims, pure diffusion), Mittag-Leffler series for the
stable model, and Euler-summed Laplace inversion for everything else.
"""

from __future__ import annotations

import enum
import math

import numpy as np

from . import levy
from ._special import mittag_leffler_scaled
from .errors import DomainError, NumericalError, UnsupportedModelError
from .inversion import InversionParams, contour, euler_sum
from .levy import ModelKind, ProcessModel, Variation


X_FLOOR = 1e-12


class ScaleMethod(str, enum.Enum):
    AUTO = "auto"
    NUMERIC_INVERSION = "numeric-inversion"
    CLOSED_FORM = "closed-form"


def _boundary_series(model: ProcessModel, q: float, n_coeffs: int):
    """Coefficients ``a_1, a_2, ...`` of ``1/(psi(beta) - q) = sum a_i beta^-i``.

    ``a_i`` equals ``W^(i-1)(0+)``.  The list stops early when the claim
    expansion needed for the next coefficient is unavailable.
    """
    sigma2 = model.sigma**2
    d = 2 if sigma2 > 0 else 1
    head = ([0.5 * sigma2] if d == 2 else []) + [model.c, -(model.lam + q)]
    n_series = max(n_coeffs - d + 1, 0)
    n_claim = max(n_series - len(head), 0)
    ms = []
    if model.has_jumps and n_claim:
        for order in range(n_claim, -1, -1):
            got = model.claims.expansion(order)
            if got is not None:
                ms = got
                break
    elif n_claim:
        ms = [0.0] * n_claim
    Q = head + [model.lam * m for m in ms]
    p = []
    for j in range(min(n_series, len(Q))):
        if j == 0:
            p.append(1.0 / Q[0])
        else:
            p.append(-sum(Q[i] * p[j - i] for i in range(1, j + 1)) / Q[0])
    return [0.0] * (d - 1) + p


class _Backend:
    """Interface shared by the evaluation backends; inputs are positive arrays."""

    orders = frozenset()

    def w_scaled(self, x, n):
        raise NotImplementedError

    def z_scaled(self, x):
        raise NotImplementedError

    def zbar_scaled(self, x):
        raise NotImplementedError

    def k_bar(self, x):
        raise NotImplementedError

    def growth_defect(self, x):
        raise NotImplementedError

    def zbar_defect(self, x):
        raise NotImplementedError


class RationalBackend(_Backend):
    """Exact partial-fraction expansion when ``1/(psi - q)`` is rational."""

    orders = frozenset(range(4))

    def __init__(self, model: ProcessModel, q: float, phi: float):
        if not rational_transform(model):
            raise UnsupportedModelError("the transform of this model is not rational")
        P = np.polynomial.Polynomial([-(model.lam + q), model.c, 0.5 * model.sigma**2])
        D = np.polynomial.Polynomial([1.0])
        N = P
        if model.has_jumps:
            claims = model.claims
            if isinstance(claims, levy.Exponential):
                D = np.polynomial.Polynomial([claims.rate, 1.0])
                M = np.polynomial.Polynomial([claims.rate])
            else:
                D = np.polynomial.Polynomial([1.0, claims.scale]) ** claims.integer_shape
                M = np.polynomial.Polynomial([1.0])
            N = P * D + model.lam * M
        N = N.trim()
        dN = N.deriv()
        roots = N.roots().astype(complex)
        for _ in range(3):
            roots = roots - N(roots) / dN(roots)
        if len(roots) > 1:
            gaps = np.abs(roots[:, None] - roots[None, :]) + np.eye(len(roots))
            if gaps.min() < 1e-8 * max(1.0, np.abs(roots).max()):
                raise UnsupportedModelError("repeated roots; partial fractions are ill-conditioned")
        idx = int(np.argmin(np.abs(roots - phi)))
        if abs(roots[idx] - phi) > 1e-6 * max(phi, 1.0):
            raise NumericalError("partial-fraction roots do not contain Phi(q)")
        others = np.delete(roots, idx)
        if others.size and others.real.max() >= phi:
            raise NumericalError("unexpected root to the right of Phi(q)")
        self.phi = phi
        self.q = q
        self.c_phi = float(np.real(D(phi) / dN(phi)))
        self.roots = others
        self.res = D(others) / dN(others)

    def _sum(self, terms):
        return np.real(terms.sum(axis=-1))

    def w_scaled(self, x, n):
        x = x[:, None]
        r, c = self.roots, self.res
        return self.c_phi * self.phi**n + self._sum(c * r**n * np.exp((r - self.phi) * x))

    def z_scaled(self, x):
        q, phi = self.q, self.phi
        e = np.exp(-phi * x)
        xx = x[:, None]
        r, c = self.roots, self.res
        other = self._sum(c * (np.exp((r - phi) * xx) - e[:, None]) / r)
        return e + q * (self.c_phi * (1.0 - e) / phi + other)

    def zbar_scaled(self, x):
        q, phi = self.q, self.phi
        e = np.exp(-phi * x)
        xx = x[:, None]
        r, c = self.roots, self.res
        other = self._sum(c * ((np.exp((r - phi) * xx) - e[:, None]) / r**2 - xx * e[:, None] / r))
        own = self.c_phi * ((1.0 - e) / phi**2 - x * e / phi)
        return x * e + q * (own + other)

    # The partial fractions satisfy sum_i c_i / r_i = 1/q over all roots, so
    # the constant and linear terms cancel exactly in the next three.

    def k_bar(self, x):
        q, phi = self.q, self.phi
        r, c = self.roots, self.res
        return q * self._sum(c * np.exp(r * x[:, None]) * (1.0 / r - 1.0 / phi))

    def growth_defect(self, x):
        r, c = self.roots, self.res
        return self._sum(c * (r - self.phi) * np.exp(r * x[:, None]))

    def zbar_defect(self, x):
        q, phi = self.q, self.phi
        r, c = self.roots, self.res
        em1 = np.expm1(r * x[:, None])
        return -1.0 / phi + q * self._sum(c * em1 * (1.0 / r**2 - 1.0 / (r * phi)))


class InversionBackend(_Backend):
    """Euler-summed Laplace inversion of shifted, cancellation-free transforms."""

    def __init__(self, model: ProcessModel, q: float, phi: float, params: InversionParams):
        self.model = model
        self.q = q
        self.phi = phi
        self.params = params
        self.numerators = {}
        if model.is_stable:
            self.numerators[0] = lambda b, _: np.ones_like(b)
            self.numerators[1] = lambda b, _: b
        else:
            coeffs = _boundary_series(model, q, 4)
            for n in range(4):
                num = self._laurent_numerator(n, coeffs)
                if num is not None:
                    self.numerators[n] = num
        self.orders = frozenset(self.numerators)

    def _laurent_numerator(self, n, coeffs):
        # N_n with T_n = N_n / (psi - q) the transform of W^(n); terms of
        # order >= d cancel analytically and are dropped.
        model, q = self.model, self.q
        if len(coeffs) < n:
            return None
        d = 2 if model.sigma > 0 else 1
        L = max(n - d, 0)
        if model.has_jumps:
            ms = model.claims.expansion(L)
            if ms is None or model.claims.remainder(np.array([1.0 + 0j]), L) is None:
                return None
        else:
            ms = [0.0] * L
        poly = {0: -(model.lam + q), 1: model.c}
        if d == 2:
            poly[2] = 0.5 * model.sigma**2
        for k, m in enumerate(ms, start=1):
            poly[-k] = poly.get(-k, 0.0) + model.lam * m
        s_terms = {n - i: coeffs[i - 1] for i in range(1, n + 1)}
        lead = {n: 1.0}
        for pp, pc in poly.items():
            for sp, sc in s_terms.items():
                lead[pp + sp] = lead.get(pp + sp, 0.0) - pc * sc
        scale = max(1.0, *(abs(v) for v in lead.values()))
        for power in [p for p in lead if p >= d]:
            if abs(lead[power]) > 1e-9 * scale:
                raise NumericalError(f"boundary expansion inconsistent at order {n}")
            del lead[power]
        lam = model.lam

        def numerator(beta, remainder):
            out = np.zeros_like(beta)
            for power, coef in lead.items():
                out = out + coef * beta**power
            if lam > 0 and s_terms:
                s_val = np.zeros_like(beta)
                for power, coef in s_terms.items():
                    s_val = s_val + coef * beta**power
                out = out - lam * beta ** (-L) * remainder(L) * s_val
            return out

        return numerator

    def _contour_values(self, beta):
        # psi on the contour plus a memo of claim remainders shared by the
        # numerators (the order-0 remainder is the claim transform itself)
        model = self.model
        memo = {}

        def remainder(order):
            if order not in memo:
                memo[order] = model.claims.remainder(beta, order)
            return memo[order]

        if model.is_stable or not model.has_jumps:
            psi = levy.psi_complex(model, beta)
        else:
            psi = model.c * beta - model.lam * (1.0 - remainder(0))
            if model.sigma > 0:
                psi = psi + 0.5 * model.sigma**2 * beta**2
        return psi, remainder

    def evaluate(self, x, names):
        """Invert the requested quantities at ``x`` sharing contour work."""
        params, phi, q = self.params, self.phi, self.q
        out = {}
        shifted = [n for n in names if n in ("w0", "w1", "w2", "w3", "z", "zbar")]
        if shifted:
            s, a = contour(x, params)
            beta = s + phi
            psi, rem = self._contour_values(beta)
            pq = psi - q
            for name in shifted:
                if name.startswith("w"):
                    vals = self.numerators[int(name[1])](beta, rem) / pq
                elif name == "z":
                    vals = psi / (beta * pq)
                else:
                    vals = psi / (beta**2 * pq)
                out[name] = euler_sum(vals, x, a, params)
        plain = [n for n in names if n in ("k_bar", "growth_defect", "zbar_defect")]
        if plain:
            s, a = contour(x, params, avoid=phi)
            psi, rem = self._contour_values(s)
            pq = psi - q
            for name in plain:
                if name == "k_bar":
                    vals = (phi * psi - q * s) / (phi * s * pq)
                elif name == "growth_defect":
                    vals = (self.numerators[1](s, rem) - phi) / pq
                else:
                    vals = psi * (phi - s) / (phi * s**2 * pq)
                out[name] = euler_sum(vals, x, a, params)
        return out

    def w_scaled(self, x, n):
        return self.evaluate(x, [f"w{n}"])[f"w{n}"]

    def z_scaled(self, x):
        return self.evaluate(x, ["z"])["z"]

    def zbar_scaled(self, x):
        return self.evaluate(x, ["zbar"])["zbar"]

    def k_bar(self, x):
        return self.evaluate(x, ["k_bar"])["k_bar"]

    def growth_defect(self, x):
        return self.evaluate(x, ["growth_defect"])["growth_defect"]

    def zbar_defect(self, x):
        return self.evaluate(x, ["zbar_defect"])["zbar_defect"]


class MittagLefflerBackend(_Backend):
    """Closed form ``W(x) = x^(a-1) E_{a,a}(q x^a)`` of the stable model."""

    orders = frozenset(range(4))
    direct_limit = 30.0

    def __init__(self, model: ProcessModel, q: float, phi: float, params: InversionParams):
        if not model.is_stable:
            raise UnsupportedModelError("Mittag-Leffler form needs the stable model")
        self.alpha = model.alpha
        self.q = q
        self.phi = phi
        self._fallback = InversionBackend(model, q, phi, params)

    def _ml(self, beta, x):
        z = self.q * x**self.alpha
        return mittag_leffler_scaled(self.alpha, beta, z, shift=self.phi * x)

    def w_scaled(self, x, n):
        a = self.alpha
        return x ** (a - 1.0 - n) * self._ml(a - n, x)

    def z_scaled(self, x):
        return self._ml(1.0, x)

    def zbar_scaled(self, x):
        return x * self._ml(2.0, x)

    def _split(self, x, direct, fallback):
        out = np.empty_like(x)
        near = self.q * x**self.alpha <= self.direct_limit
        if near.any():
            out[near] = direct(x[near])
        if (~near).any():
            out[~near] = fallback(x[~near])
        return out

    def k_bar(self, x):
        def direct(x):
            return np.exp(self.phi * x) * (self.z_scaled(x) - self.q * self.w_scaled(x, 0) / self.phi)

        return self._split(x, direct, self._fallback.k_bar)

    def growth_defect(self, x):
        def direct(x):
            return np.exp(self.phi * x) * (self.w_scaled(x, 1) - self.phi * self.w_scaled(x, 0))

        return self._split(x, direct, self._fallback.growth_defect)

    def zbar_defect(self, x):
        def direct(x):
            return np.exp(self.phi * x) * (self.zbar_scaled(x) - self.z_scaled(x) / self.phi)

        return self._split(x, direct, self._fallback.zbar_defect)


def rational_transform(model: ProcessModel) -> bool:
    if model.is_stable:
        return False
    if not model.has_jumps:
        return True
    claims = model.claims
    if isinstance(claims, levy.Exponential):
        return True
    return isinstance(claims, levy.Gamma) and claims.integer_shape is not None


def closed_form_available(model: ProcessModel) -> bool:
    return model.is_stable or rational_transform(model)


def _hermite(x, nodes, f, d1, d2):
    """Piecewise Hermite interpolation through ``nodes`` (sorted)."""
    i = np.clip(np.searchsorted(nodes, x, side="right") - 1, 0, nodes.size - 2)
    h = nodes[i + 1] - nodes[i]
    t = (x - nodes[i]) / h
    t2 = t * t
    t3 = t2 * t
    if d2 is None:
        h00 = 2 * t3 - 3 * t2 + 1
        h10 = t3 - 2 * t2 + t
        h01 = -2 * t3 + 3 * t2
        h11 = t3 - t2
        return h00 * f[i] + h10 * h * d1[i] + h01 * f[i + 1] + h11 * h * d1[i + 1]
    t4 = t3 * t
    t5 = t4 * t
    b0 = 1 - 10 * t3 + 15 * t4 - 6 * t5
    b1 = t - 6 * t3 + 8 * t4 - 3 * t5
    b2 = 0.5 * (t2 - 3 * t3 + 3 * t4 - t5)
    b3 = 0.5 * (t3 - 2 * t4 + t5)
    b4 = -4 * t3 + 7 * t4 - 3 * t5
    b5 = 10 * t3 - 15 * t4 + 6 * t5
    hh = h * h
    return (
        b0 * f[i]
        + b1 * h * d1[i]
        + b2 * hh * d2[i]
        + b3 * hh * d2[i + 1]
        + b4 * h * d1[i + 1]
        + b5 * f[i + 1]
    )


class ScaleEvaluator:
    """Scale functions of ``model`` at discount rate ``q``.

    Parameters
    ----------
    method:
        ``"auto"`` picks the closed form when one exists and falls back to
        numerical inversion otherwise.
    grid_step, x_max:
        The numerical-inversion backend tabulates its quantities on
        geometric nodes over ``[1e-4, 1]`` followed by uniform nodes of width
        ``grid_step`` up to ``x_max``, and interpolates with Hermite
        polynomials built from inverted derivatives.  Outside the grid, and
        for the second and third derivatives, the inversion runs directly.
    derivative_step:
        Step of the Richardson-extrapolated finite differences used for
        derivative orders the backend cannot invert directly.

    Every method accepts scalars or arrays and returns the same shape.
    """

    def __init__(
        self,
        model: ProcessModel,
        q: float,
        method: ScaleMethod | str = ScaleMethod.AUTO,
        inversion: InversionParams = InversionParams(),
        grid_step: float = 1e-2,
        x_max: float | None = None,
        search_bound: float = 10.0,
        derivative_step: float = 1e-3,
        cache: bool = True,
    ):
        q = float(q)
        if not (q > 0 and math.isfinite(q)):
            raise DomainError(f"q must be positive, got {q}")
        self.model = model
        self.q = q
        self.inversion = inversion
        self.derivative_step = float(derivative_step)
        self.phi = levy.right_inverse_phi(model, q)
        self.psi_prime_phi = levy.laplace_exponent_derivative(model, self.phi)
        self.psi_prime_zero = levy.laplace_exponent_derivative(model, 0.0)
        self.variation = levy.variation_kind(model)
        self.x_max = float(x_max) if x_max is not None else max(10.0, 4.0 * search_bound)
        method = ScaleMethod(method)
        if method is ScaleMethod.AUTO:
            method = ScaleMethod.CLOSED_FORM if closed_form_available(model) else ScaleMethod.NUMERIC_INVERSION
        if method is ScaleMethod.CLOSED_FORM:
            if model.is_stable:
                self._backend = MittagLefflerBackend(model, q, self.phi, inversion)
            else:
                self._backend = RationalBackend(model, q, self.phi)
        else:
            self._backend = InversionBackend(model, q, self.phi, inversion)
        self.method = method
        self._boundary = self._boundary_values()
        self._tables = {}
        self.grid_step = float(grid_step)
        if cache and method is ScaleMethod.NUMERIC_INVERSION:
            self._build_tables()

    def __repr__(self):
        return f"ScaleEvaluator(model={self.model!r}, q={self.q}, method={self.method.value})"

    # -- boundary values -------------------------------------------------

    def _boundary_values(self):
        model = self.model
        out = {}
        if model.is_stable:
            out[0] = 0.0
            for n in (1, 2, 3):
                sign = math.copysign(1.0, math.gamma(model.alpha - n))
                out[n] = sign * math.inf
            return out
        coeffs = _boundary_series(model, self.q, 4)
        for n in range(4):
            out[n] = coeffs[n] if n < len(coeffs) else math.nan
        if self.variation is Variation.BOUNDED:
            out[0] = 1.0 / model.c
            out[1] = (model.lam + self.q) / model.c**2
        else:
            out[0] = 0.0
            out[1] = 2.0 / model.sigma**2
        return out

    @property
    def w_at_zero(self) -> float:
        return self._boundary[0]

    @property
    def w1_at_zero(self) -> float:
        return self._boundary[1]

    def boundary(self, order: int) -> float:
        value = self._boundary[order]
        if math.isnan(value):
            raise NumericalError(f"W^({order})(0+) is unavailable for this claim law")
        return value

    # -- tabulation ------------------------------------------------------

    def _build_tables(self):
        # geometric cells resolve the boundary layer at zero, uniform cells
        # of width grid_step cover the rest
        h = self.grid_step
        split = 1.0
        near = np.geomspace(1e-4, split, 250)[:-1]
        n = int(math.ceil((self.x_max - split) / h)) + 1
        nodes = np.concatenate([near, split + h * np.arange(n)])
        names = [f"w{k}" for k in sorted(self._backend.orders)]
        names += ["z", "zbar", "k_bar", "growth_defect", "zbar_defect"]
        v = self._backend.evaluate(nodes, names)
        q, phi = self.q, self.phi
        e = np.exp(phi * nodes)
        g = [v.get(f"w{k}") for k in range(4)]
        tables = {}

        def add(name, f, d1, d2):
            if d1 is not None:
                tables[name] = (f, d1, d2)

        def comb(*parts):
            return None if any(p is None for p in parts[1::2]) else sum(c * p for c, p in zip(parts[::2], parts[1::2]))

        g0, g1, g2, g3 = g
        add("w0", g0, comb(1, g1, -phi, g0), comb(1, g2, -2 * phi, g1, phi**2, g0))
        if g1 is not None:
            add("w1", g1, comb(1, g2, -phi, g1), comb(1, g3, -2 * phi, g2, phi**2, g1))
        zs, zbs = v["z"], v["zbar"]
        dz = q * g0 - phi * zs
        add("z", zs, dz, comb(q, g1, -q * phi, g0, -phi, dz))
        dzb = zs - phi * zbs
        add("zbar", zbs, dzb, dz - phi * dzb)
        dd = v["growth_defect"]
        d_dd = comb(1, g2, -phi, g1)
        d_dd = None if d_dd is None else e * d_dd
        dd2 = comb(1, g3, -phi, g2)
        dd2 = None if dd2 is None else e * dd2
        add("k_bar", v["k_bar"], -q / phi * dd, None if d_dd is None else -q / phi * d_dd)
        add("growth_defect", dd, d_dd, dd2)
        add("zbar_defect", v["zbar_defect"], v["k_bar"], -q / phi * dd)
        self._nodes = nodes
        self._tables = tables

    def _zero_limit(self, name):
        if name.startswith("w"):
            return self._boundary[int(name[1])]
        w0, w1 = self._boundary[0], self._boundary[1]
        return {
            "z": 1.0,
            "zbar": 0.0,
            "k_bar": 1.0 - self.q * w0 / self.phi,
            "growth_defect": w1 - self.phi * w0,
            "zbar_defect": -1.0 / self.phi,
        }[name]

    def _near_zero(self, name, x):
        # leading-order behaviour below X_FLOOR, where the inversion contour
        # would overflow: linear for finite-variation limits, power laws for
        # the stable model
        f_floor = self._direct(name, np.array([X_FLOOR]))[0]
        f0 = self._zero_limit(name)
        p = 1.0
        if self.model.is_stable:
            alpha = self.model.alpha
            p = {"k_bar": alpha - 1.0, "growth_defect": alpha - 2.0}.get(name, 1.0)
            if name.startswith("w"):
                p = alpha - 1.0 - int(name[1])
        r = (x / X_FLOOR) ** p
        if not math.isfinite(f0):
            return f_floor * r
        return f0 + (f_floor - f0) * r

    def _positive(self, name, x):
        # x is a 1-d array of positive abscissae
        if isinstance(self._backend, InversionBackend) and np.any(x < X_FLOOR):
            out = np.empty_like(x)
            tiny = x < X_FLOOR
            out[tiny] = self._near_zero(name, x[tiny])
            if (~tiny).any():
                out[~tiny] = self._positive(name, x[~tiny])
            return out
        table = self._tables.get(name)
        if table is None:
            return self._direct(name, x)
        out = np.empty_like(x)
        inside = (x >= self._nodes[0]) & (x <= self._nodes[-1])
        if inside.any():
            f, d1, d2 = table
            out[inside] = _hermite(x[inside], self._nodes, f, d1, d2)
        if (~inside).any():
            out[~inside] = self._direct(name, x[~inside])
        return out

    def _direct(self, name, x):
        backend = self._backend
        if name.startswith("w"):
            n = int(name[1])
            if n in backend.orders:
                return backend.w_scaled(x, n)
            return self._fd_scaled(x, n)
        return getattr(backend, {"z": "z_scaled", "zbar": "zbar_scaled"}.get(name, name))(x)

    def _fd_scaled(self, x, n):
        # Richardson-extrapolated differences of the natural-scale order n-1.
        h = np.minimum(self.derivative_step, x / 4.0)

        def f(y):
            return np.exp(self.phi * y) * self._positive(f"w{n - 1}", y)

        def central(step):
            return (f(x + step) - f(x - step)) / (2.0 * step)

        value = (4.0 * central(h / 2.0) - central(h)) / 3.0
        return np.exp(-self.phi * x) * value

    # -- public evaluation ----------------------------------------------

    def _apply(self, x, name, negative, zero, natural=False):
        arr = np.asarray(x, dtype=float)
        flat = np.atleast_1d(arr).ravel()
        if np.isnan(flat).any():
            raise DomainError("abscissa is NaN")
        out = np.empty_like(flat)
        neg = flat < 0
        nil = flat == 0
        pos = flat > 0
        if neg.any():
            out[neg] = negative(flat[neg])
        if nil.any():
            out[nil] = zero
        if pos.any():
            vals = self._positive(name, flat[pos])
            if natural:
                with np.errstate(over="ignore"):
                    vals = vals * np.exp(self.phi * flat[pos])
            out[pos] = vals
        if not np.all(np.isfinite(out[pos])) and not natural:
            raise NumericalError(f"non-finite {name} value; inversion failed to converge")
        if arr.ndim == 0:
            return float(out[0])
        return out.reshape(arr.shape)

    def w(self, x, order: int = 0):
        """``W^(order)(x)``; zero for ``x < 0`` and the right limit at zero."""
        if order not in (0, 1, 2, 3):
            raise DomainError(f"derivative order must be 0..3, got {order}")
        zero = self._boundary[order]
        return self._apply(x, f"w{order}", np.zeros_like, zero, natural=True)

    def w_scaled(self, x, order: int = 0):
        """``exp(-Phi x) W^(order)(x)``."""
        if order not in (0, 1, 2, 3):
            raise DomainError(f"derivative order must be 0..3, got {order}")
        return self._apply(x, f"w{order}", np.zeros_like, self._boundary[order])

    def z(self, x):
        return self._apply(x, "z", np.ones_like, 1.0, natural=True)

    def z_scaled(self, x):
        return self._apply(x, "z", lambda y: np.exp(-self.phi * y), 1.0)

    def z_bar(self, x):
        return self._apply(x, "zbar", lambda y: y, 0.0, natural=True)

    def z_bar_scaled(self, x):
        return self._apply(x, "zbar", lambda y: y * np.exp(-self.phi * y), 0.0)

    def k_bar(self, x):
        """``Z(x) - q W(x) / Phi``."""
        zero = 1.0 - self.q * self.w_at_zero / self.phi
        return self._apply(x, "k_bar", np.ones_like, zero)

    def growth_defect(self, x):
        """``W'(x) - Phi W(x)``."""
        zero = self.w1_at_zero - self.phi * self.w_at_zero
        return self._apply(x, "growth_defect", np.zeros_like, zero)

    def zbar_defect(self, x):
        """``Zbar(x) - Z(x) / Phi``."""
        return self._apply(x, "zbar_defect", lambda y: y - 1.0 / self.phi, -1.0 / self.phi)

    def integral_w(self, lo, hi):
        """``int_lo^hi W`` through ``Z``; exact up to the accuracy of ``Z``."""
        return (self.z(hi) - self.z(lo)) / self.q


def w(ev: ScaleEvaluator, x, order: int = 0):
    return ev.w(x, order)


def z(ev: ScaleEvaluator, x):
    return ev.z(x)


def z_bar(ev: ScaleEvaluator, x):
    return ev.z_bar(x)


def trapezoid_integral_w(ev: ScaleEvaluator, lo: float, hi: float, step: float = 1e-3) -> float:
    """Trapezoid rule for ``int_lo^hi W`` on a uniform grid of the given step."""
    n = max(int(math.ceil((hi - lo) / step)), 1)
    grid = np.linspace(lo, hi, n + 1)
    vals = ev.w(grid)
    return float(np.sum(0.5 * (vals[1:] + vals[:-1]) * np.diff(grid)))


_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(16)


def _gauss_panels(edges):
    a, b = edges[:-1, None], edges[1:, None]
    mid, half = 0.5 * (a + b), 0.5 * (b - a)
    return (mid + half * _GL_NODES).ravel(), (half * _GL_WEIGHTS).ravel()


def verify_laplace_identity(ev: ScaleEvaluator, beta: float) -> float:
    """Residual ``|int_0^inf exp(-beta x) W(x) dx - 1/(psi(beta) - q)|``.

    The integral is truncated where the scaled integrand drops below double
    precision and the remainder is replaced by its asymptotic tail.
    """
    beta = float(beta)
    if not beta > ev.phi:
        raise DomainError(f"beta must exceed Phi(q) = {ev.phi}")
    delta = beta - ev.phi
    x_end = min(max(40.0 / delta, 1.0), 4000.0)
    near = np.geomspace(1e-12, min(1.0, x_end), 40)
    far = np.arange(1.0, x_end + 0.5, 0.5) if x_end > 1.0 else np.array([])
    edges = np.unique(np.concatenate([[0.0], near, far, [x_end]]))
    nodes, weights = _gauss_panels(edges)
    integrand = np.exp(-delta * nodes) * ev.w_scaled(nodes)
    integral = float(np.dot(weights, integrand))
    integral += math.exp(-delta * x_end) / (delta * ev.psi_prime_phi)
    target = 1.0 / (levy.laplace_exponent(ev.model, beta) - ev.q)
    return abs(integral - target)
