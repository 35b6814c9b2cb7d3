"""Closed-form covering-number and sample-complexity bounds (natural logs).

Every function here is a pure, deterministic evaluation of an explicit
formula; :func:`sample_complexity_upper` adds an integer search on top.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

from .learning import pac_excess_risk_bound
from .networks import DomainError
from .numerics import InvalidParameterError


class SearchError(RuntimeError):
    """The integer search for a sample size did not bracket a solution."""


class RangeWarning(UserWarning):
    """Parameters lie outside the range where a lower bound is proven."""


def _open_unit(**kw):
    for name, v in kw.items():
        if not 0.0 < v < 1.0:
            raise DomainError(f"{name} must lie in (0, 1), got {v}")


def _positive_int(**kw):
    for name, v in kw.items():
        if int(v) != v or v < 1:
            raise DomainError(f"{name} must be a positive integer, got {v}")


def single_layer_cover_bound(d: int, p: int, epsilon: float, sigma: float) -> float:
    """Log covering number of single-layer noisy sigmoid nets ``R^d -> R^p``.

    ``p (d+1) ln(30 d^2.5 sqrt(ln((5d - e s)/(e s))) / (e^1.5 s^2) * ln(5d/(e s)))``
    with ``e = epsilon`` and ``s = sigma``.
    """
    _positive_int(d=d, p=p)
    if not epsilon > 0 or not sigma > 0:
        raise DomainError("epsilon and sigma must be positive")
    es = epsilon * sigma
    if es >= 5 * d:
        raise DomainError(f"need sigma < 5d/epsilon (got epsilon*sigma = {es}, 5d = {5 * d})")
    inner = (5 * d - es) / es
    if inner <= 1:
        raise DomainError("ln((5d - eps*sigma)/(eps*sigma)) must be positive (need eps*sigma < 2.5d)")
    arg = 30 * d ** 2.5 * math.sqrt(math.log(inner)) / (epsilon ** 1.5 * sigma ** 2) * math.log(5 * d / es)
    return p * (d + 1) * math.log(arg)


@dataclass(frozen=True)
class ComposedCover:
    log_cover: float
    radius: float


def composition_cover_bound(logN1: float, logN2: float, eps1: float = 0.0,
                            eps2: float = 0.0) -> ComposedCover:
    """Global cover of a composition: log sizes add, radii add."""
    if logN1 < 0 or logN2 < 0 or eps1 < 0 or eps2 < 0:
        raise InvalidParameterError("log cover sizes and radii must be non-negative")
    return ComposedCover(logN1 + logN2, eps1 + eps2)


def multilayer_cover_bound(w: int, epsilon: float, sigma: float) -> float:
    """``w ln w + 3 w ln(30 sqrt(5) w^2/(e s) * ln(5 w^2/(e s)))``."""
    _positive_int(w=w)
    _open_unit(epsilon=epsilon, sigma=sigma)
    r = w * w / (epsilon * sigma)
    return w * math.log(w) + 3 * w * math.log(30 * math.sqrt(5) * r * math.log(5 * r))


def recurrent_cover_reduction(epsilon: float, T: int) -> float:
    """Block-level radius needed for a recurrent cover of radius ``epsilon``."""
    if T < 1:
        raise DomainError(f"T must be at least 1, got {T}")
    if not epsilon > 0:
        raise DomainError("epsilon must be positive")
    return epsilon / T


def rnn_cover_bound(w: int, T: int, epsilon: float, sigma: float) -> float:
    """Log covering number of noisy recurrent sigmoid nets with ``w`` weights."""
    _positive_int(T=T)
    _open_unit(epsilon=epsilon, sigma=sigma)
    return multilayer_cover_bound(w, recurrent_cover_reduction(epsilon, T), sigma)


def ell2_cover_radius_from_tv(B: float, q: int, epsilon: float) -> float:
    """l2 radius ``2 B eps sqrt(q)`` of the derandomized cover."""
    if not B > 0 or q < 1 or epsilon < 0:
        raise InvalidParameterError("need B > 0, q >= 1, epsilon >= 0")
    return 2.0 * B * epsilon * math.sqrt(q)


def upper_bound_cover_log(w: int, T: int, sigma: float, epsilon: float, gamma: float = 0.1,
                          B: float = 0.5, q: int = 1) -> float:
    """Log cover size entering the sample-size search (TV radius ``gamma eps'/(2B sqrt q)``)."""
    eps_prime = epsilon / 32.0
    tv_radius = gamma * eps_prime / ell2_cover_radius_from_tv(B, q, 1.0)
    return rnn_cover_bound(w, T, tv_radius, sigma)


def sample_complexity_upper(w: int, T: int, sigma: float, epsilon: float, delta: float,
                            gamma: float = 0.1, B: float = 0.5, q: int = 1,
                            max_m: int = 2 ** 62) -> int:
    """Smallest ``m`` whose excess-risk bound at accuracy ``eps/32`` is at most ``epsilon``."""
    _open_unit(sigma=sigma, epsilon=epsilon, delta=delta)
    if not 0 < gamma <= 0.5:
        raise DomainError(f"gamma must lie in (0, 1/2], got {gamma}")
    logN = upper_bound_cover_log(w, T, sigma, epsilon, gamma, B, q)
    eps_prime = epsilon / 32.0

    def ok(m: int) -> bool:
        return pac_excess_risk_bound(m, logN, eps_prime, delta, gamma) <= epsilon

    hi = 1
    while not ok(hi):
        hi *= 2
        if hi > max_m:
            raise SearchError(f"no sample size up to {max_m} meets the target")
    lo = hi // 2   # ok(lo) is False or lo == 0
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if ok(mid):
            hi = mid
        else:
            lo = mid
    return hi


def lower_bound_in_range(w: int, T: int, epsilon: float, delta: float) -> bool:
    return T >= 3 and w >= 19 and 0 < epsilon < 1 / 40 and 0 < delta < 1 / 40


def sample_complexity_lower(w: int, T: int, epsilon: float, delta: float, C: float = 1.0) -> float:
    """``C (w T + ln(1/delta)) / eps^2``.

    Outside the proven range (``T >= 3``, ``w >= 19``, ``eps, delta < 1/40``)
    the formula is still evaluated and a :class:`RangeWarning` is issued.
    """
    _positive_int(w=w, T=T)
    _open_unit(epsilon=epsilon, delta=delta)
    if not C > 0:
        raise InvalidParameterError("C must be positive")
    if not lower_bound_in_range(w, T, epsilon, delta):
        warnings.warn(f"lower bound evaluated outside its proven range "
                      f"(w={w}, T={T}, epsilon={epsilon}, delta={delta})", RangeWarning, stacklevel=2)
    return C * (w * T + math.log(1.0 / delta)) / epsilon ** 2
