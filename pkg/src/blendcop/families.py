"""Ten parametric bivariate copula families.

Each family exposes the distribution function, density, log-density,
conditional distribution h(u, v) = P[V <= v | U = u], its inverse,
exact sampling, and a joint survival function P[U > u, V > v] that keeps
relative accuracy arbitrarily deep into the upper corner (needed by the
extremal-dependence diagnostics, where absolute-accuracy formulas like
1 - u - v + C(u, v) cancel catastrophically).

Public entry points clamp their arguments to [CLAMP, 1 - CLAMP]; the
underscore methods assume arguments strictly inside (0, 1) and are used
by internal machinery that must reach closer to the corner than the
public clamp allows.
"""
from __future__ import annotations

import numpy as np
from scipy import stats
from scipy.special import betainc, gammaln, ndtr, ndtri

from . import special
from .errors import ParameterError, SamplingError

CLAMP = 1e-10


def clamp_unit(x):
    """Pull values into the open unit interval used for all evaluations."""
    return np.clip(np.asarray(x, dtype=float), CLAMP, 1.0 - CLAMP)


def _bisect_conditional(hfun, u, w, lo=CLAMP, hi=1.0 - CLAMP, iters=90):
    """Solve h(u, v) = w for v by vectorised bisection (h nondecreasing in v)."""
    u = np.asarray(u, dtype=float)
    w = np.asarray(w, dtype=float)
    a = np.full(np.broadcast_shapes(u.shape, w.shape), lo)
    b = np.full(a.shape, hi)
    for _ in range(iters):
        mid = 0.5 * (a + b)
        less = hfun(u, mid) < w
        a = np.where(less, mid, a)
        b = np.where(less, b, mid)
    return 0.5 * (a + b)


class Copula:
    """Base class; subclasses define the closed forms of one family."""

    tag: str = ""
    param_names: tuple = ()

    def __init__(self, *params):
        if len(params) != len(self.param_names):
            raise ParameterError(
                f"{self.tag} takes {len(self.param_names)} parameter(s) "
                f"{self.param_names}, got {len(params)}"
            )
        self.params = tuple(float(p) for p in params)
        self._validate()

    def _validate(self):
        raise NotImplementedError

    # -- public API (clamped) -------------------------------------------
    def cdf(self, u, v):
        c = self._cdf(clamp_unit(u), clamp_unit(v))
        return np.clip(c, 0.0, 1.0)

    def pdf(self, u, v):
        return np.exp(self.logpdf(u, v))

    def logpdf(self, u, v):
        with np.errstate(divide="ignore", over="ignore"):
            out = self._logpdf(clamp_unit(u), clamp_unit(v))
        if np.any(np.isnan(out)):
            from .errors import EvaluationError

            flat = int(np.argmax(np.isnan(np.ravel(np.atleast_1d(out)))))
            uu = np.ravel(np.broadcast_to(np.asarray(u, dtype=float), np.shape(out)))
            vv = np.ravel(np.broadcast_to(np.asarray(v, dtype=float), np.shape(out)))
            raise EvaluationError(
                f"{self.tag} density produced NaN at (u={uu[flat]:.6g}, v={vv[flat]:.6g})"
            )
        return out

    def cond_cdf(self, u, v):
        """h(u, v) = P[V <= v | U = u]."""
        return np.clip(self._h(clamp_unit(u), clamp_unit(v)), 0.0, 1.0)

    def cond_quantile(self, u, w):
        """Inverse of ``cond_cdf`` in its second argument."""
        u = clamp_unit(u)
        w = np.clip(np.asarray(w, dtype=float), 1e-14, 1.0 - 1e-14)
        return self._hinv(u, w)

    def survival(self, u, v):
        """P[U > u, V > v] with deep-corner relative accuracy."""
        return np.maximum(self._surv(clamp_unit(u), clamp_unit(v)), 0.0)

    def sample(self, n, rng):
        """n exact draws, via conditional inversion unless a latent
        representation is cheaper."""
        if n < 0:
            raise ValueError("sample size must be nonnegative")
        u = rng.random(n)
        w = rng.random(n)
        v = self._hinv(clamp_unit(u), np.clip(w, 1e-14, 1 - 1e-14))
        return np.column_stack([u, v])

    # -- internals (unclamped) -------------------------------------------
    def _cdf(self, u, v):
        raise NotImplementedError

    def _logpdf(self, u, v):
        raise NotImplementedError

    def _h(self, u, v):
        raise NotImplementedError

    def _h2(self, u, v):
        """P[U <= u | V = v]; default assumes an exchangeable family."""
        return self._h(v, u)

    def _hinv(self, u, w):
        v = _bisect_conditional(self._h, u, w)
        if np.any(~np.isfinite(v)):
            bad = np.ravel(np.broadcast_to(u, np.shape(v)))[
                int(np.argmax(~np.isfinite(np.ravel(v))))
            ]
            raise SamplingError(f"{self} conditional inversion failed at u={bad}")
        return v

    def _surv(self, u, v):
        return 1.0 - u - v + self._cdf(u, v)

    # -- plumbing ----------------------------------------------------------
    def __repr__(self):
        inner = ",".join(format(p, ".12g") for p in self.params)
        return f"{self.tag}({inner})"

    def __eq__(self, other):
        return isinstance(other, Copula) and self.tag == other.tag and self.params == other.params

    def __hash__(self):
        return hash((self.tag, self.params))

    @property
    def n_params(self):
        return len(self.params)


# ---------------------------------------------------------------------------
# elliptical families
# ---------------------------------------------------------------------------
class Gaussian(Copula):
    tag = "gaussian"
    param_names = ("rho",)

    def _validate(self):
        (rho,) = self.params
        if not -1.0 < rho < 1.0:
            raise ParameterError(f"gaussian rho must lie in (-1, 1), got {rho}")

    @property
    def rho(self):
        return self.params[0]

    def _cdf(self, u, v):
        return special.bvn_cdf(ndtri(u), ndtri(v), self.rho)

    def _logpdf(self, u, v):
        r = self.rho
        x = ndtri(u)
        y = ndtri(v)
        om = (1.0 - r) * (1.0 + r)
        return -0.5 * np.log(om) - (r * r * (x * x + y * y) - 2.0 * r * x * y) / (2.0 * om)

    def _h(self, u, v):
        r = self.rho
        return ndtr((ndtri(v) - r * ndtri(u)) / np.sqrt((1.0 - r) * (1.0 + r)))

    def _hinv(self, u, w):
        r = self.rho
        return ndtr(r * ndtri(u) + np.sqrt((1.0 - r) * (1.0 + r)) * ndtri(w))

    def _surv(self, u, v):
        u = np.asarray(u, dtype=float)
        v = np.asarray(v, dtype=float)
        deep = np.minimum(1.0 - u, 1.0 - v) < 1e-3
        out = np.where(deep, 0.0, 1.0 - u - v + special.bvn_cdf(ndtri(u), ndtri(v), self.rho))
        if np.any(deep):
            flat = np.argwhere(np.atleast_1d(deep))
            o = np.atleast_1d(np.asarray(out, dtype=float))
            uu, vv = np.broadcast_arrays(np.atleast_1d(u), np.atleast_1d(v))
            for ix in map(tuple, flat):
                a = -ndtri(1.0 - uu[ix])
                b = -ndtri(1.0 - vv[ix])
                o[ix] = special.bvn_orthant_tail(a, b, self.rho)
            out = o.reshape(np.shape(out)) if np.ndim(out) else float(o[0])
        return out if np.ndim(out) else float(out)

    def sample(self, n, rng):
        z = rng.standard_normal((n, 2))
        y = self.rho * z[:, 0] + np.sqrt(1.0 - self.rho**2) * z[:, 1]
        return np.column_stack([ndtr(z[:, 0]), ndtr(y)])


class StudentT(Copula):
    tag = "student_t"
    param_names = ("rho", "nu")

    def _validate(self):
        rho, nu = self.params
        if not -1.0 < rho < 1.0:
            raise ParameterError(f"student_t rho must lie in (-1, 1), got {rho}")
        if nu <= 0.0:
            raise ParameterError(f"student_t nu must be positive, got {nu}")

    def _cdf(self, u, v):
        rho, nu = self.params
        x = stats.t.ppf(np.asarray(u, dtype=float), nu)
        y = stats.t.ppf(np.asarray(v, dtype=float), nu)
        flat = np.broadcast_arrays(np.atleast_1d(x), np.atleast_1d(y))
        vals = np.array(
            [special.bvt_cdf(a, b, rho, nu) for a, b in zip(flat[0].ravel(), flat[1].ravel())]
        ).reshape(flat[0].shape)
        return vals if np.ndim(u) or np.ndim(v) else float(vals.ravel()[0])

    def _logpdf(self, u, v):
        rho, nu = self.params
        x = stats.t.ppf(u, nu)
        y = stats.t.ppf(v, nu)
        om = (1.0 - rho) * (1.0 + rho)
        lognum = (nu + 1.0) / 2.0 * (np.log1p(x * x / nu) + np.log1p(y * y / nu))
        logden = (nu + 2.0) / 2.0 * np.log1p((x * x + y * y - 2.0 * rho * x * y) / (nu * om))
        const = (
            gammaln((nu + 2.0) / 2.0)
            + gammaln(nu / 2.0)
            - 2.0 * gammaln((nu + 1.0) / 2.0)
            - 0.5 * np.log(om)
        )
        return const + lognum - logden

    def _h(self, u, v):
        rho, nu = self.params
        x = stats.t.ppf(u, nu)
        y = stats.t.ppf(v, nu)
        scale = np.sqrt((nu + x * x) / (nu + 1.0) * (1.0 - rho) * (1.0 + rho))
        return stats.t.cdf((y - rho * x) / scale, nu + 1.0)

    def _hinv(self, u, w):
        rho, nu = self.params
        x = stats.t.ppf(u, nu)
        scale = np.sqrt((nu + x * x) / (nu + 1.0) * (1.0 - rho) * (1.0 + rho))
        y = rho * x + scale * stats.t.ppf(w, nu + 1.0)
        return stats.t.cdf(y, nu)

    def _surv(self, u, v):
        rho, nu = self.params
        uu, vv = np.broadcast_arrays(np.atleast_1d(u).astype(float), np.atleast_1d(v).astype(float))
        out = np.empty(uu.shape)
        for ix in np.ndindex(uu.shape):
            du, dv = 1.0 - uu[ix], 1.0 - vv[ix]
            if min(du, dv) >= 1e-3:
                out[ix] = du + dv - 1.0 + special.bvt_cdf(
                    stats.t.ppf(uu[ix], nu), stats.t.ppf(vv[ix], nu), rho, nu
                )
            else:
                a = stats.t.isf(du, nu)
                b = stats.t.isf(dv, nu)
                out[ix] = special.bvt_orthant_tail(a, b, rho, nu)
        return out if (np.ndim(u) or np.ndim(v)) else float(out.ravel()[0])

    def sample(self, n, rng):
        rho, nu = self.params
        z = rng.standard_normal((n, 2))
        y = rho * z[:, 0] + np.sqrt(1.0 - rho**2) * z[:, 1]
        s = np.sqrt(rng.chisquare(nu, n) / nu)
        return np.column_stack([stats.t.cdf(z[:, 0] / s, nu), stats.t.cdf(y / s, nu)])


# ---------------------------------------------------------------------------
# Archimedean families
# ---------------------------------------------------------------------------
class Frank(Copula):
    tag = "frank"
    param_names = ("alpha",)

    def _validate(self):
        (a,) = self.params
        if a == 0.0:
            raise ParameterError("frank alpha must be nonzero")

    def _parts(self, u, v):
        a = self.params[0]
        return -np.expm1(-a * u), -np.expm1(-a * v), -np.expm1(-a)

    def _cdf(self, u, v):
        a = self.params[0]
        eu, ev, D = self._parts(u, v)
        return -np.log1p(-eu * ev / D) / a

    def _logpdf(self, u, v):
        a = self.params[0]
        eu, ev, D = self._parts(u, v)
        return np.log(a * D) - a * (u + v) - 2.0 * np.log(np.abs(D - eu * ev))

    def _h(self, u, v):
        a = self.params[0]
        eu, ev, D = self._parts(u, v)
        return np.exp(-a * u) * ev / (D - eu * ev)

    def _hinv(self, u, w):
        a = self.params[0]
        eu = -np.expm1(-a * u)
        D = -np.expm1(-a)
        ev = w * D / (np.exp(-a * u) + w * eu)
        return -np.log1p(-ev) / a

    def _surv(self, u, v):
        # Frank is radially symmetric: P[U>u, V>v] = C(1-u, 1-v)
        return self._cdf(1.0 - u, 1.0 - v)


class Clayton(Copula):
    tag = "clayton"
    param_names = ("alpha",)

    def _validate(self):
        (a,) = self.params
        if a <= 0.0:
            raise ParameterError(f"clayton alpha must be positive, got {a}")

    def _wm1(self, u, v):
        # w - 1 where w = u^-a + v^-a - 1, computed without cancellation
        a = self.params[0]
        return np.expm1(-a * np.log(u)) + np.expm1(-a * np.log(v))

    def _cdf(self, u, v):
        a = self.params[0]
        return np.exp(-np.log1p(self._wm1(u, v)) / a)

    def _logpdf(self, u, v):
        a = self.params[0]
        return (
            np.log1p(a)
            - (a + 1.0) * (np.log(u) + np.log(v))
            - (2.0 + 1.0 / a) * np.log1p(self._wm1(u, v))
        )

    def _h(self, u, v):
        a = self.params[0]
        return np.exp(-(a + 1.0) * np.log(u) - (1.0 + 1.0 / a) * np.log1p(self._wm1(u, v)))

    def _hinv(self, u, w):
        a = self.params[0]
        t = np.exp(-a * np.log(u)) * np.expm1(-a / (1.0 + a) * np.log(w))
        return np.exp(-np.log1p(t) / a)

    def _surv(self, u, v):
        return (1.0 - u) + (1.0 - v) - (-np.expm1(-np.log1p(self._wm1(u, v)) / self.params[0]))


class Joe(Copula):
    tag = "joe"
    param_names = ("alpha",)

    def _validate(self):
        (a,) = self.params
        if a <= 1.0:
            raise ParameterError(f"joe alpha must exceed 1, got {a}")

    def _A(self, x, y):
        a = self.params[0]
        xa = x**a
        ya = y**a
        return xa + ya - xa * ya

    def _cdf(self, u, v):
        a = self.params[0]
        return -np.expm1(np.log(self._A(1.0 - u, 1.0 - v)) / a)

    def _logpdf(self, u, v):
        a = self.params[0]
        x = 1.0 - u
        y = 1.0 - v
        A = self._A(x, y)
        return (1.0 / a - 2.0) * np.log(A) + (a - 1.0) * (np.log(x) + np.log(y)) + np.log(a - 1.0 + A)

    def _h(self, u, v):
        a = self.params[0]
        x = 1.0 - u
        y = 1.0 - v
        A = self._A(x, y)
        return A ** (1.0 / a - 1.0) * x ** (a - 1.0) * (1.0 - y**a)

    def _surv(self, u, v):
        a = self.params[0]
        return (1.0 - u) + (1.0 - v) - self._A(1.0 - u, 1.0 - v) ** (1.0 / a)


# ---------------------------------------------------------------------------
# extreme-value families: C = exp(-ell(x, y)) with x = -log u, y = -log v
# ---------------------------------------------------------------------------
class _ExtremeValue(Copula):
    """Shared survival arithmetic for exponent-function copulas."""

    def _ell(self, x, y):
        raise NotImplementedError

    def _dell_dx(self, x, y):
        raise NotImplementedError

    def _dell_dy(self, x, y):
        return self._dell_dx(y, x)

    def _cdf(self, u, v):
        return np.exp(-self._ell(-np.log(u), -np.log(v)))

    def _h(self, u, v):
        x = -np.log(np.asarray(u, dtype=float))
        y = -np.log(np.asarray(v, dtype=float))
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            out = np.exp(-self._ell(x, y) + x) * self._dell_dx(x, y)
        out = np.where(x == 0.0, 0.0, out)
        out = np.where(y == 0.0, 1.0, out)
        return out if np.ndim(out) else float(out)

    def _h2(self, u, v):
        x = -np.log(np.asarray(u, dtype=float))
        y = -np.log(np.asarray(v, dtype=float))
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            out = np.exp(-self._ell(x, y) + y) * self._dell_dy(x, y)
        out = np.where(y == 0.0, 0.0, out)
        out = np.where(x == 0.0, 1.0, out)
        return out if np.ndim(out) else float(out)

    def _surv(self, u, v):
        x = -np.log(np.asarray(u, dtype=float))
        y = -np.log(np.asarray(v, dtype=float))
        return np.expm1(-self._ell(x, y)) - np.expm1(-x) - np.expm1(-y)


class Gumbel(_ExtremeValue):
    tag = "gumbel"
    param_names = ("alpha",)

    def _validate(self):
        (a,) = self.params
        if a <= 1.0:
            raise ParameterError(f"gumbel alpha must exceed 1, got {a}")

    def _ell(self, x, y):
        a = self.params[0]
        return (x**a + y**a) ** (1.0 / a)

    def _dell_dx(self, x, y):
        a = self.params[0]
        return x ** (a - 1.0) * (x**a + y**a) ** (1.0 / a - 1.0)

    def _logpdf(self, u, v):
        a = self.params[0]
        x = -np.log(u)
        y = -np.log(v)
        s = self._ell(x, y)
        return (
            -s
            + x
            + y
            + (a - 1.0) * (np.log(x) + np.log(y))
            + (1.0 - 2.0 * a) * np.log(s)
            + np.log(s + a - 1.0)
        )


class InvertedGumbel(Copula):
    tag = "inverted_gumbel"
    param_names = ("alpha",)

    def __init__(self, *params):
        super().__init__(*params)
        self._base = Gumbel(*params)

    def _validate(self):
        (a,) = self.params
        if a <= 1.0:
            raise ParameterError(f"inverted_gumbel alpha must exceed 1, got {a}")

    def _cdf(self, u, v):
        x = -np.log1p(-u)
        y = -np.log1p(-v)
        return u + v + np.expm1(-self._base._ell(x, y))

    def _logpdf(self, u, v):
        return self._base._logpdf(1.0 - u, 1.0 - v)

    def _h(self, u, v):
        return 1.0 - self._base._h(1.0 - u, 1.0 - v)

    def _surv(self, u, v):
        return self._base._cdf(1.0 - u, 1.0 - v)


class HuslerReiss(_ExtremeValue):
    tag = "husler_reiss"
    param_names = ("alpha",)

    def _validate(self):
        (a,) = self.params
        if a <= 0.0:
            raise ParameterError(f"husler_reiss alpha must be positive, got {a}")

    def _z(self, x, y):
        a = self.params[0]
        return 1.0 / a + 0.5 * a * np.log(x / y)

    def _ell(self, x, y):
        return x * ndtr(self._z(x, y)) + y * ndtr(self._z(y, x))

    def _dell_dx(self, x, y):
        return ndtr(self._z(x, y))

    def _logpdf(self, u, v):
        a = self.params[0]
        x = -np.log(u)
        y = -np.log(v)
        z1 = self._z(x, y)
        z2 = self._z(y, x)
        bracket = ndtr(z1) * ndtr(z2) + 0.5 * a / y * special.norm_pdf(z1)
        return -self._ell(x, y) + x + y + np.log(bracket)


class Galambos(_ExtremeValue):
    tag = "galambos"
    param_names = ("alpha",)

    def _validate(self):
        (a,) = self.params
        if a <= 0.0:
            raise ParameterError(f"galambos alpha must be positive, got {a}")

    def _logG(self, x, y):
        a = self.params[0]
        return np.logaddexp(-a * np.log(x), -a * np.log(y))

    def _ell(self, x, y):
        a = self.params[0]
        return x + y - np.exp(-self._logG(x, y) / a)

    def _dell_dx(self, x, y):
        a = self.params[0]
        return 1.0 - np.exp(-(1.0 + 1.0 / a) * self._logG(x, y) - (a + 1.0) * np.log(x))

    def _logpdf(self, u, v):
        a = self.params[0]
        x = -np.log(u)
        y = -np.log(v)
        logG = self._logG(x, y)
        A1 = np.exp(-(1.0 + 1.0 / a) * logG - (a + 1.0) * np.log(x))
        A2 = np.exp(-(1.0 + 1.0 / a) * logG - (a + 1.0) * np.log(y))
        T = (1.0 + a) * np.exp(-(2.0 + 1.0 / a) * logG - (a + 1.0) * (np.log(x) + np.log(y)))
        return -self._ell(x, y) + x + y + np.log((1.0 - A1) * (1.0 - A2) + T)


class ColesTawn(_ExtremeValue):
    """Asymmetric extreme-value family driven by a Dirichlet spectral density.

    The exponent mixes regularised incomplete beta functions evaluated at
    q = alpha*y / (alpha*y + beta*x); at beta = alpha it reduces to a
    symmetric model.
    """

    tag = "coles_tawn"
    param_names = ("alpha", "beta")

    def _validate(self):
        a, b = self.params
        if a <= 0.0 or b <= 0.0:
            raise ParameterError(f"coles_tawn alpha and beta must be positive, got ({a}, {b})")

    def _q(self, x, y):
        a, b = self.params
        den = a * y + b * x
        return a * y / den, b * x / den

    def _ell(self, x, y):
        a, b = self.params
        q, _ = self._q(x, y)
        return x * (1.0 - betainc(a + 1.0, b, q)) + y * betainc(a, b + 1.0, q)

    def _dell_dx(self, x, y):
        a, b = self.params
        q, _ = self._q(x, y)
        return 1.0 - betainc(a + 1.0, b, q)

    def _dell_dy(self, x, y):
        a, b = self.params
        q, _ = self._q(x, y)
        return betainc(a, b + 1.0, q)

    def _logpdf(self, u, v):
        a, b = self.params
        x = -np.log(u)
        y = -np.log(v)
        q, one_m_q = self._q(x, y)
        W1 = 1.0 - betainc(a + 1.0, b, q)
        W2 = betainc(a, b + 1.0, q)
        log_t = (
            np.log(a * b)
            + gammaln(a + b + 1.0)
            - gammaln(a)
            - gammaln(b)
            + (a - 1.0) * np.log(q)
            + (b - 1.0) * np.log(one_m_q)
            + np.log(x)
            + np.log(y)
            - 3.0 * np.log(a * y + b * x)
        )
        return -self._ell(x, y) + x + y + np.log(W1 * W2 + np.exp(log_t))


FAMILIES = {
    cls.tag: cls
    for cls in (
        Gaussian,
        StudentT,
        Frank,
        Clayton,
        Joe,
        Gumbel,
        InvertedGumbel,
        HuslerReiss,
        Galambos,
        ColesTawn,
    )
}


def make_copula(tag: str, params) -> Copula:
    if tag not in FAMILIES:
        raise ParameterError(
            f"unknown copula family {tag!r}; valid tags: {', '.join(sorted(FAMILIES))}"
        )
    return FAMILIES[tag](*params)


def parse_copula(text: str) -> Copula:
    """Parse interface strings like ``gumbel(2)`` or ``student_t(0.5,4)``."""
    text = text.strip()
    if not text.endswith(")") or "(" not in text:
        raise ParameterError(
            f"cannot parse copula spec {text!r}; expected tag(p1[,p2]) with tag in "
            f"{', '.join(sorted(FAMILIES))}"
        )
    tag, argstr = text[:-1].split("(", 1)
    try:
        params = [float(s) for s in argstr.split(",")] if argstr.strip() else []
    except ValueError as exc:
        raise ParameterError(f"bad numeric parameter in {text!r}") from exc
    return make_copula(tag.strip(), params)
