"""Weingarten pairs ``nu1 = f(nu)``, ``nu2 = g(nu)`` and their canonical scalings."""
from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Callable, Optional

import numpy as np
from scipy import integrate

from .errors import InvalidBasePoint, PairDomainViolation

Fn = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class WeingartenPair:
    """Principal curvatures as functions of one generator ``nu``.

    ``If`` and ``Ig`` are optional closed-form indefinite antiderivatives of
    ``f'/(f-g)`` and ``g'/(g-f)``; without them the integrals are done by
    adaptive quadrature from ``nu0``.
    """

    f: Fn
    g: Fn
    df: Fn
    dg: Fn
    d2f: Fn
    d2g: Fn
    nu0: float = 1.0
    a: float = 1.0
    b: float = 1.0
    If: Optional[Fn] = None
    Ig: Optional[Fn] = None
    H: Optional[float] = None
    K: Optional[float] = None
    eps: Optional[int] = None
    case: str = "general"

    def with_base(self, nu0, a=None, b=None):
        return replace(self, nu0=float(nu0), a=self.a if a is None else float(a),
                       b=self.b if b is None else float(b))

    def check_domain(self, nu, mask=None):
        """Raise if ``f - g <= 0`` or ``f' g' = 0`` at a valid value of ``nu``."""
        nu = np.asarray(nu, float)
        sel = nu if mask is None else nu[np.asarray(mask, bool)]
        with np.errstate(all="ignore"):
            gap = self.f(sel) - self.g(sel)
            prod = self.df(sel) * self.dg(sel)
        if np.any(~(gap > 0)):
            raise PairDomainViolation("f(nu) - g(nu) must be positive on the working range")
        if np.any(~(prod != 0)) or np.any(~np.isfinite(prod)):
            raise PairDomainViolation("f'(nu) g'(nu) must not vanish on the working range")

    def _quad(self, fun, nu):
        nu = np.asarray(nu, float)
        flat = nu.ravel()
        out = np.empty_like(flat)
        # sort so each quadrature only covers the gap from the previous value
        order = np.argsort(flat)
        start = np.searchsorted(flat[order], self.nu0)
        prev, acc = self.nu0, 0.0
        for k in order[start:]:
            acc += integrate.quad(fun, prev, flat[k], epsabs=1e-13, epsrel=1e-12)[0]
            out[k], prev = acc, flat[k]
        prev, acc = self.nu0, 0.0
        for k in order[:start][::-1]:
            acc += integrate.quad(fun, prev, flat[k], epsabs=1e-13, epsrel=1e-12)[0]
            out[k], prev = acc, flat[k]
        return out.reshape(nu.shape)

    def int_f(self, nu):
        """``int_{nu0}^{nu} f'/(f - g)``."""
        if self.If is not None:
            return self.If(np.asarray(nu, float)) - self.If(np.float64(self.nu0))
        return self._quad(lambda s: self.df(s) / (self.f(s) - self.g(s)), nu)

    def int_g(self, nu):
        """``int_{nu0}^{nu} g'/(g - f)``."""
        if self.Ig is not None:
            return self.Ig(np.asarray(nu, float)) - self.Ig(np.float64(self.nu0))
        return self._quad(lambda s: self.dg(s) / (self.g(s) - self.f(s)), nu)

    def w(self, nu1):
        """The relation ``nu2 = w(nu1)``, i.e. ``g`` composed with ``f^{-1}``."""
        from scipy.optimize import brentq
        nu1 = np.atleast_1d(np.asarray(nu1, float))
        out = np.empty_like(nu1)
        for k, t in enumerate(nu1):
            lo, hi = self.nu0 - 1.0, self.nu0 + 1.0
            for _ in range(60):
                if (self.f(lo) - t) * (self.f(hi) - t) <= 0:
                    break
                lo, hi = self.nu0 - 2 * (self.nu0 - lo), self.nu0 + 2 * (hi - self.nu0)
            out[k] = self.g(brentq(lambda s: self.f(s) - t, lo, hi, xtol=1e-15))
        return out


def cmc_pair(H, nu0=None, canonical=True) -> WeingartenPair:
    """``f = H + nu``, ``g = H - nu``; principal curvatures of mean curvature ``H``."""
    H = float(H)
    one = lambda s: np.ones_like(np.asarray(s, float))
    zero = lambda s: np.zeros_like(np.asarray(s, float))
    half_log = lambda s: 0.5 * np.log(np.abs(s))
    pair = WeingartenPair(
        f=lambda s: H + np.asarray(s, float), g=lambda s: H - np.asarray(s, float),
        df=one, dg=lambda s: -one(s), d2f=zero, d2g=zero,
        If=half_log, Ig=half_log, H=H, case="minimal" if H == 0 else "cmc")
    if nu0 is not None:
        pair = pair.with_base(nu0)
        if canonical:
            a, b = canonical_scaling(pair.case, nu0, H=H)
            pair = pair.with_base(nu0, a, b)
    return pair


def minimal_pair(nu0=None, canonical=True) -> WeingartenPair:
    return cmc_pair(0.0, nu0, canonical)


def constant_curvature_pair(K, nu0=None, canonical=True) -> WeingartenPair:
    """``f = nu``, ``g = K / nu``."""
    K = float(K)
    pair = WeingartenPair(
        f=lambda s: np.asarray(s, float), g=lambda s: K / np.asarray(s, float),
        df=lambda s: np.ones_like(np.asarray(s, float)),
        dg=lambda s: -K / np.asarray(s, float) ** 2,
        d2f=lambda s: np.zeros_like(np.asarray(s, float)),
        d2g=lambda s: 2.0 * K / np.asarray(s, float) ** 3,
        If=lambda s: 0.5 * np.log(np.abs(s**2 - K)),
        Ig=lambda s: -np.log(np.abs(s)) + 0.5 * np.log(np.abs(s**2 - K)),
        K=K, case="constK")
    if nu0 is not None:
        pair = pair.with_base(nu0)
        if canonical:
            a, b = canonical_scaling("constK", nu0, K=K)
            pair = replace(pair.with_base(nu0, a, b), eps=int(np.sign(nu0**2 - K)))
    return pair


def canonical_scaling(case, nu0, H=None, K=None):
    """Scale constants ``(a, b)`` giving the canonical principal parameters.

    ``cmc``/``minimal``: ``a = b = sqrt(2 nu0)``.  ``constK``:
    ``a^2 = eps (nu0^2 - K)`` and ``b^2 = a^2 / nu0^2`` with
    ``eps = sign(nu0^2 - K)``.
    """
    nu0 = float(nu0)
    if case in ("cmc", "minimal"):
        if not nu0 > 0:
            raise InvalidBasePoint(f"CMC canonical scaling needs nu0 > 0, got {nu0}")
        a = np.sqrt(2.0 * nu0)
        return float(a), float(a)
    if case == "constK":
        if K is None:
            raise ValueError("constK scaling needs K")
        if not nu0 * (nu0**2 - K) > 0:
            raise InvalidBasePoint(f"need nu0 (nu0^2 - K) > 0, got nu0 = {nu0}, K = {K}")
        eps = np.sign(nu0**2 - K)
        a = np.sqrt(eps * (nu0**2 - K))
        return float(a), float(a / abs(nu0))
    raise ValueError(f"no canonical scaling for case {case!r}")


def pair_for_case(case, H=None, K=None, nu0=None) -> WeingartenPair:
    if case in ("cmc", "minimal"):
        return cmc_pair(0.0 if case == "minimal" else H, nu0)
    if case in ("constK", "K+1", "K-1"):
        if K is None:
            K = 1.0 if case == "K+1" else -1.0
        return constant_curvature_pair(K, nu0)
    raise ValueError(f"unknown case {case!r}")
