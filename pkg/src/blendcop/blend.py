"""The blended dependence model.

Two copula densities, one tailored to the body and one to the joint upper
tail, are mixed through a pointwise weight and renormalised:

    cstar(u, v) = [pi(u, v) c_tail(u, v) + (1 - pi(u, v)) c_body(u, v)] / K.

Because the weight depends on the coordinates, cstar has non-uniform
margins; the object actually fitted to data is the copula induced by
cstar, obtained by dividing out the margins after a quantile transform.
All marginal quantities are numerical: the normalising constants come
from corner-refined tensor quadrature, margins from cached grids, and
their inverses from monotone cubic interpolation, rebuilt whenever the
parameter vector changes.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.interpolate import PchipInterpolator
from scipy.optimize import brentq

from .errors import EvaluationError, ModelNotBuiltError
from .families import CLAMP, Copula, clamp_unit, make_copula, parse_copula
from .quadrature import QuadratureSpec, corner_refined, gauss_legendre, marginal_grid, unit_nodes
from .weighting import WeightingFunction, make_weighting, parse_weighting

_GL32 = gauss_legendre(32, 0.0, 1.0)


@dataclass(frozen=True)
class ModelParams:
    """Flat view of the free parameters (weight, tail vector, body vector)."""

    theta: float
    tail: tuple
    body: tuple

    def flatten(self):
        return np.concatenate([[self.theta], self.tail, self.body])


class _AxisCache:
    """Marginal grid artifacts for one coordinate of cstar."""

    __slots__ = ("grid", "pdf_values", "cdf_values", "pdf_interp", "cdf_interp", "quantile_interp")

    def __init__(self, grid, pdf_values):
        self.grid = grid
        self.pdf_values = pdf_values
        self.pdf_interp = PchipInterpolator(grid, pdf_values, extrapolate=False)
        anti = self.pdf_interp.antiderivative()
        cdf = anti(grid)
        # PCHIP of positive data is positive, so cdf is strictly increasing
        self.cdf_values = cdf
        self.cdf_interp = anti
        self.quantile_interp = PchipInterpolator(cdf, grid, extrapolate=False)


class BlendedModel:
    """A (tail, body, weighting) triple plus its numerical cache."""

    def __init__(
        self,
        tail: Copula,
        body: Copula,
        weighting: WeightingFunction,
        quad: QuadratureSpec | None = None,
    ):
        self.tail = tail
        self.body = body
        self.weighting = weighting
        self.quad = quad if quad is not None else QuadratureSpec()
        self._cache = None

    # ------------------------------------------------------------------
    # construction
    # ------------------------------------------------------------------
    @property
    def built(self) -> bool:
        return self._cache is not None

    def _require_cache(self):
        if self._cache is None:
            raise ModelNotBuiltError(
                "blended model cache not built; call .build() before evaluating"
            )
        return self._cache

    def build(self) -> "BlendedModel":
        k_t, k_b = self._norm_constants_quadrature()
        axes = []
        x, w = unit_nodes(self.quad)
        grid = marginal_grid(self.quad)
        for axis in (0, 1):
            fvals = self._marginal_pdf_quadrature(axis, grid, x, w, norm=k_t + k_b)
            axes.append(_AxisCache(grid, fvals))
        self._cache = {"K_t": k_t, "K_b": k_b, "K": k_t + k_b, "axes": axes}
        return self

    def _norm_constants_quadrature(self):
        x, w = unit_nodes(self.quad)
        U, V = np.meshgrid(x, x, indexing="ij")
        W = np.outer(w, w)
        pi = self.weighting(U, V)
        ct = np.exp(self.tail.logpdf(U, V))
        cb = np.exp(self.body.logpdf(U, V))
        for name, vals in (("tail", ct), ("body", cb)):
            if not np.all(np.isfinite(vals)):
                i, j = np.argwhere(~np.isfinite(vals))[0]
                raise EvaluationError(
                    f"non-finite {name} density at quadrature node "
                    f"(u={U[i, j]:.6g}, v={V[i, j]:.6g})"
                )
        return float(np.sum(W * pi * ct)), float(np.sum(W * (1.0 - pi) * cb))

    def _unnorm_density(self, u, v):
        pi = self.weighting(u, v)
        with np.errstate(divide="ignore", over="ignore"):
            ct = np.exp(self.tail._logpdf(u, v))
            cb = np.exp(self.body._logpdf(u, v))
        return pi * ct + (1.0 - pi) * cb

    def _marginal_pdf_quadrature(self, axis, xs, nodes, weights, norm):
        xs = np.asarray(xs, dtype=float)
        if axis == 0:
            vals = self._unnorm_density(xs[:, None], nodes[None, :])
        else:
            vals = self._unnorm_density(nodes[None, :], xs[:, None])
        return (vals @ weights) / norm

    # ------------------------------------------------------------------
    # densities and margins
    # ------------------------------------------------------------------
    @property
    def norm_constants(self):
        """(K, K_tail, K_body); K = K_tail + K_body by construction."""
        c = self._require_cache()
        return c["K"], c["K_t"], c["K_b"]

    def cstar_pdf(self, u, v):
        """Normalised blended density at interior points."""
        c = self._require_cache()
        return self._unnorm_density(clamp_unit(u), clamp_unit(v)) / c["K"]

    def marginal_pdf(self, axis, x):
        c = self._require_cache()
        ax = c["axes"][axis]
        x = np.clip(np.asarray(x, dtype=float), ax.grid[0], ax.grid[-1])
        return ax.pdf_interp(x)

    def marginal_cdf(self, axis, x):
        c = self._require_cache()
        ax = c["axes"][axis]
        xx = np.clip(np.asarray(x, dtype=float), ax.grid[0], ax.grid[-1])
        out = np.clip(ax.cdf_interp(xx), 0.0, 1.0)
        return out if np.ndim(x) else float(out)

    def marginal_quantile(self, axis, q):
        """Inverse marginal CDF; spline inside the cached grid, bisection on
        the exact integral beyond it (spline extrapolation is unsafe in
        the tails)."""
        c = self._require_cache()
        ax = c["axes"][axis]
        scalar = np.ndim(q) == 0
        q = np.atleast_1d(np.asarray(q, dtype=float))
        if np.any((q <= 0.0) | (q >= 1.0)):
            raise ValueError("quantile level must lie strictly inside (0, 1)")
        lo, hi = ax.cdf_values[0], ax.cdf_values[-1]
        inside = (q >= lo) & (q <= hi)
        out = np.empty(q.shape)
        out[inside] = ax.quantile_interp(q[inside])
        for ix in map(tuple, np.argwhere(~inside)):
            out[ix] = self._quantile_exact(axis, float(q[ix]))
        return float(out[0]) if scalar else out

    def copula_pdf(self, u, v):
        return np.exp(self.copula_logpdf(u, v))

    def copula_logpdf(self, u, v):
        """Log-density of the copula induced by cstar."""
        c = self._require_cache()
        u = clamp_unit(u)
        v = clamp_unit(v)
        x = self.marginal_quantile(0, u)
        y = self.marginal_quantile(1, v)
        pi = self.weighting(x, y)
        with np.errstate(divide="ignore", over="ignore"):
            ct = np.exp(self.tail._logpdf(x, y))
            cb = np.exp(self.body._logpdf(x, y))
            num = np.log(pi * ct + (1.0 - pi) * cb) - np.log(c["K"])
            den = np.log(self.marginal_pdf(0, x)) + np.log(self.marginal_pdf(1, y))
        return num - den

    def copula_cdf(self, u, v):
        """CDF of the induced copula: cumulative quadrature of cstar over
        the rectangle below the transformed point."""
        self._require_cache()
        u = np.asarray(u, dtype=float)
        v = np.asarray(v, dtype=float)
        uu, vv = np.broadcast_arrays(np.atleast_1d(u), np.atleast_1d(v))
        out = np.empty(uu.shape)
        for ix in np.ndindex(uu.shape):
            out[ix] = self._copula_cdf_scalar(float(uu[ix]), float(vv[ix]))
        return out if (np.ndim(u) or np.ndim(v)) else float(out.ravel()[0])

    def _copula_cdf_scalar(self, u, v):
        eps = self.quad.eps
        u = float(np.clip(u, CLAMP, 1.0 - CLAMP))
        v = float(np.clip(v, CLAMP, 1.0 - CLAMP))
        x = float(self.marginal_quantile(0, u)) if u > eps else eps
        y = float(self.marginal_quantile(1, v)) if v > eps else eps
        if x <= eps or y <= eps:
            return 0.0
        c = self._require_cache()
        order = max(6, self.quad.panel_order // 2)
        xs, xw = corner_refined(order, eps, x)
        ys, yw = corner_refined(order, eps, y)
        vals = self._unnorm_density(xs[:, None], ys[None, :])
        return float(xw @ vals @ yw) / c["K"]

    # ------------------------------------------------------------------
    # exact (grid-free) marginal and joint tail integrals
    # ------------------------------------------------------------------
    def _pi_expect_diff(self, axis, t):
        """Pi_tail(t) - Pi_body(t) where Pi_c(t) = E[pi(t, V) | coord = t, c]."""
        if axis == 0:
            cond_t = lambda s, w: self.tail._h(s, w)
            cond_b = lambda s, w: self.body._h(s, w)
        else:
            cond_t = lambda s, w: self.tail._h2(w, s)
            cond_b = lambda s, w: self.body._h2(w, s)
        return (
            self.weighting.conditional_expectation(t, cond_t)
            - self.weighting.conditional_expectation(t, cond_b)
        )

    def marginal_cdf_exact(self, axis, x):
        """F(x) by direct integration, independent of the cached grid."""
        c = self._require_cache()
        s, w = _GL32
        t = x * s
        return float(x * (1.0 + self._pi_expect_diff(axis, t) @ w) / c["K"])

    def marginal_survival_exact(self, axis, d):
        """P[coord > 1 - d] by direct integration; accurate for tiny d."""
        c = self._require_cache()
        s, w = _GL32
        t = 1.0 - d * s
        return float(d * (1.0 + self._pi_expect_diff(axis, t) @ w) / c["K"])

    def _quantile_exact(self, axis, q):
        if q >= 0.5:
            target = 1.0 - q
            f = lambda logd: np.log(self.marginal_survival_exact(axis, np.exp(logd))) - np.log(
                target
            )
        else:
            target = q
            f = lambda logd: np.log(self.marginal_cdf_exact(axis, np.exp(logd))) - np.log(target)
        lo = np.log(target) + np.log(CLAMP)
        hi = np.log(0.75)
        logd = brentq(f, lo, hi, xtol=1e-12, rtol=1e-13)
        d = float(np.exp(logd))
        return 1.0 - d if q >= 0.5 else d

    def joint_upper_survival(self, x, y):
        """P[U* > x, V* > y] under cstar with deep-corner relative accuracy.

        The tail-copula part is its analytic survival; the weight
        corrections integrate the conditional distribution by parts, so
        no density spike is ever sampled:
          K S = S_tail(x, y) - A(tail) + A(body),
          A(c) = int_x^1 (1-pi)(s,y) P[V>y|U=s] ds
                 - int_x^1 int_y^1 dpi/dv (s,t) P[V>t|U=s] dt ds.
        """
        c = self._require_cache()
        dx = 1.0 - x
        dy = 1.0 - y
        a, aw = _GL32
        s = 1.0 - dx * a
        t = 1.0 - dy * a

        def correction(fam):
            gbar_edge = 1.0 - fam._h(s, np.full_like(s, y))
            term1 = dx * float((((1.0 - self.weighting(s, y)) * gbar_edge)) @ aw)
            S2, T2 = np.meshgrid(s, t, indexing="ij")
            gbar = 1.0 - fam._h(S2, T2)
            term2 = dx * dy * float(aw @ (self.weighting.dv(S2, T2) * gbar) @ aw)
            return term1 - term2

        s_tail = float(self.tail._surv(np.asarray(x), np.asarray(y)))
        val = (s_tail - correction(self.tail) + correction(self.body)) / c["K"]
        return max(val, 0.0)

    # ------------------------------------------------------------------
    # parameters and serialisation
    # ------------------------------------------------------------------
    @property
    def params(self) -> ModelParams:
        return ModelParams(self.weighting.theta, self.tail.params, self.body.params)

    def with_params(self, theta, tail_params, body_params) -> "BlendedModel":
        """Same structure, new parameter vector, fresh (unbuilt) cache."""
        return BlendedModel(
            make_copula(self.tail.tag, tail_params),
            make_copula(self.body.tag, body_params),
            make_weighting(self.weighting.tag, theta),
            self.quad,
        )

    def spec_strings(self):
        fmt = lambda ps: ",".join(format(p, ".17g") for p in ps)
        return {
            "tail": f"{self.tail.tag}({fmt(self.tail.params)})",
            "body": f"{self.body.tag}({fmt(self.body.params)})",
            "weighting": f"{self.weighting.tag}({format(self.weighting.theta, '.17g')})",
        }

    def save(self, path):
        lines = ["# blendcop model"]
        for key, val in self.spec_strings().items():
            lines.append(f"{key} = {val}")
        lines.append(f"nodes = {self.quad.nodes}")
        lines.append(f"eps = {format(self.quad.eps, '.17g')}")
        lines.append(f"grid_size = {self.quad.grid_size}")
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("\n".join(lines) + "\n")

    @classmethod
    def load(cls, path) -> "BlendedModel":
        fields = {}
        with open(path, encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if not line or line.startswith("#"):
                    continue
                key, _, val = line.partition("=")
                fields[key.strip()] = val.strip()
        missing = {"tail", "body", "weighting"} - set(fields)
        if missing:
            raise EvaluationError(f"model file {path} missing keys: {sorted(missing)}")
        quad = QuadratureSpec(
            nodes=int(fields.get("nodes", 64)),
            eps=float(fields.get("eps", 1e-6)),
            grid_size=int(fields.get("grid_size", 200)),
        )
        return cls(
            parse_copula(fields["tail"]),
            parse_copula(fields["body"]),
            parse_weighting(fields["weighting"]),
            quad,
        )

    def __repr__(self):
        return f"BlendedModel(tail={self.tail!r}, body={self.body!r}, weighting={self.weighting!r})"
