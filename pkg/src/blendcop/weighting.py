"""Dynamic weighting functions that shift mass between the two copulas.

A weighting pi(u, v; theta) maps the open unit square into (0, 1) and is
nondecreasing in each argument, so the tail component dominates toward
the upper corner. Two forms are built in; further forms can be added to
the registry as long as they also provide the partial derivative in v
and the conditional expectation used by the survival diagnostics.
"""
from __future__ import annotations

import numpy as np

from .errors import ParameterError
from .quadrature import gauss_legendre

_GLW_X, _GLW_W = gauss_legendre(48, 0.0, 1.0)


class WeightingFunction:
    tag: str = ""

    def __init__(self, theta: float):
        theta = float(theta)
        if not theta > 0.0:
            raise ParameterError(f"weighting theta must be positive, got {theta}")
        self.theta = theta

    def __call__(self, u, v):
        raise NotImplementedError

    def dv(self, u, v):
        """Partial derivative of the weight in its second argument."""
        raise NotImplementedError

    def conditional_expectation(self, t, cond_cdf):
        """E[pi(t, V)] where V has distribution function ``cond_cdf(t, v)``.

        Integration by parts removes the conditional density, so this
        stays accurate even where that density concentrates into a spike:
        E[pi] = pi(t, 1) - int_0^1 dpi/dv (t, v) * cond_cdf(t, v) dv.
        """
        t = np.atleast_1d(np.asarray(t, dtype=float))[:, None]
        vals = self.dv(t, _GLW_X[None, :]) * cond_cdf(t, _GLW_X[None, :])
        return np.ravel(self(t, 1.0)) - vals @ _GLW_W

    def __repr__(self):
        return f"{self.tag}({format(self.theta, '.12g')})"

    def __eq__(self, other):
        return (
            isinstance(other, WeightingFunction)
            and self.tag == other.tag
            and self.theta == other.theta
        )

    def __hash__(self):
        return hash((self.tag, self.theta))


class PowerProduct(WeightingFunction):
    """pi(u, v) = (u v)^theta."""

    tag = "power"

    def __call__(self, u, v):
        return (np.asarray(u, dtype=float) * v) ** self.theta

    def dv(self, u, v):
        th = self.theta
        return th * np.asarray(u, dtype=float) ** th * np.asarray(v, dtype=float) ** (th - 1.0)

    def conditional_expectation(self, t, cond_cdf):
        # substitute w = v^theta so the theta < 1 endpoint singularity of
        # dpi/dv disappears: int th t^th v^(th-1) H(v) dv = t^th int H(w^(1/th)) dw
        th = self.theta
        t = np.atleast_1d(np.asarray(t, dtype=float))[:, None]
        vals = cond_cdf(t, _GLW_X[None, :] ** (1.0 / th))
        return np.ravel(t**th) * (1.0 - vals @ _GLW_W)


class ExpComplement(WeightingFunction):
    """pi(u, v) = exp(-theta (1-u)(1-v))."""

    tag = "exp_complement"

    def __call__(self, u, v):
        return np.exp(-self.theta * (1.0 - np.asarray(u, dtype=float)) * (1.0 - v))

    def dv(self, u, v):
        du = 1.0 - np.asarray(u, dtype=float)
        return self.theta * du * np.exp(-self.theta * du * (1.0 - v))


WEIGHTINGS = {cls.tag: cls for cls in (PowerProduct, ExpComplement)}


def register_weighting(cls):
    """Register an additional weighting form under its ``tag``."""
    if not cls.tag:
        raise ValueError("weighting class needs a nonempty tag")
    WEIGHTINGS[cls.tag] = cls
    return cls


def make_weighting(tag: str, theta: float) -> WeightingFunction:
    if tag not in WEIGHTINGS:
        raise ParameterError(
            f"unknown weighting {tag!r}; valid tags: {', '.join(sorted(WEIGHTINGS))}"
        )
    return WEIGHTINGS[tag](theta)


def parse_weighting(text: str) -> WeightingFunction:
    """Parse interface strings like ``power(1.5)`` or ``exp_complement(2)``."""
    text = text.strip()
    if not text.endswith(")") or "(" not in text:
        raise ParameterError(
            f"cannot parse weighting spec {text!r}; expected tag(theta) with tag in "
            f"{', '.join(sorted(WEIGHTINGS))}"
        )
    tag, argstr = text[:-1].split("(", 1)
    try:
        theta = float(argstr)
    except ValueError as exc:
        raise ParameterError(f"bad numeric theta in {text!r}") from exc
    return make_weighting(tag.strip(), theta)
