# Closed-form rate ingredients: iterated-log exponent, boundary factors, sensitivity
# constants, the eta/epsilon balance and the predicted orders used as acceptance floors.

import math
from typing import Optional

from ..coefficients import Regime
from ..exceptions import ArgumentError
from ..models import Struct

# psi needs log log log(1/h) > 0
PSI_DOMAIN_MAX = math.exp(-math.e)


def psi(h: float) -> float:
    """log3(1/h) / log2(1/h) with log_k the k-times iterated natural logarithm."""
    h = float(h)
    if not 0.0 < h < PSI_DOMAIN_MAX:
        raise ArgumentError(f"psi is defined for 0 < h < exp(-e) ~ {PSI_DOMAIN_MAX:.6f}, got {h!r}")
    log2 = math.log(math.log(1.0 / h))
    return math.log(log2) / log2


def borel_bound_factor(dist: float, gamma: float) -> float:
    """Multiplier of h^(gamma/2) in the indicator weak-error bound at distance ``dist`` from the boundary.

    The threshold exp(-1/gamma) itself belongs to the power branch.
    """
    dist = float(dist)
    gamma = float(gamma)
    if not 0.0 < gamma <= 1.0:
        raise ArgumentError(f"gamma must lie in (0, 1], got {gamma!r}")
    if not dist > 0.0:
        raise ArgumentError(f"distance to the boundary must be positive, got {dist!r}")
    if dist >= math.exp(-1.0 / gamma):
        return 1.0 / (gamma * dist**gamma) + 1.0
    return abs(math.log(dist)) + 1.0


def alpha_q(q: float, d: int) -> float:
    q = float(q)
    if not q > d:
        raise ArgumentError(f"the L^q exponent must exceed the dimension: q={q!r}, d={d}")
    if math.isinf(q):
        return 0.5
    return 0.5 * (1.0 - d / q)


class SensitivityConstant(Struct):
    alpha: float
    theta: float
    log_value: float


def sensitivity_constant(eta: float, q: float, d: int, base_c: float = 1.0) -> SensitivityConstant:
    """C exp(C (1/theta + 1)^(1/theta + 1)) with theta = min(eta/2, alpha(q)), kept in log scale."""
    eta = float(eta)
    if not 0.0 < eta <= 1.0:
        raise ArgumentError(f"eta must lie in (0, 1], got {eta!r}")
    if not base_c > 0.0:
        raise ArgumentError(f"base constant must be positive, got {base_c!r}")
    alpha = alpha_q(q, d)
    theta = min(0.5 * eta, alpha)
    power = 1.0 / theta + 1.0
    return SensitivityConstant(
        alpha=alpha,
        theta=theta,
        log_value=math.log(base_c) + base_c * power**power,
    )


def eta_schedule(h: float, gamma: float) -> float:
    """2 psi(h) clipped into (0, gamma); gamma / 2 where psi is undefined."""
    try:
        eta = 2.0 * psi(h)
    except ArgumentError:
        return 0.5 * gamma
    if eta <= 0.0:
        return 0.5 * gamma
    return min(eta, math.nextafter(gamma, 0.0))


def epsilon_schedule(h: float, dt: float, gamma: float, eta: float, log_c_eta: float = 0.0) -> float:
    """Mollification radius balancing the mollifier error against the discretization error."""
    if not (h > 0.0 and dt > 0.0):
        raise ArgumentError(f"h and dt must be positive, got h={h!r}, dt={dt!r}")
    if not 0.0 < eta < 2.0:
        raise ArgumentError(f"eta must lie in (0, 2), got {eta!r}")
    return math.exp((math.log(h) - (1.0 - gamma) * math.log(dt) - log_c_eta) / (2.0 - eta))


def predicted_order(
    regime: Regime,
    d: int,
    gamma: float = 1.0,
    constant_sigma: bool = False,
    dist_to_I: Optional[float] = None,
    h: Optional[float] = None,
) -> float:
    """Leading exponent of h in the error bound for this regime and evaluation point.

    Piecewise-smooth fields get 1/(2d) globally, 1/(d+1) at points at least sqrt(h) from
    the discontinuities, and 1/d there when sigma does not depend on the state.
    """
    regime = Regime(regime)
    if regime is Regime.HOLDER:
        return 0.5 * gamma
    if dist_to_I is None or h is None or dist_to_I < math.sqrt(h):
        return 1.0 / (2 * d)
    if constant_sigma:
        return 1.0 / d
    return 1.0 / (d + 1)


def admissible_indicator_distance(dt: float, h: float, gamma: float) -> float:
    """Smallest boundary distance at which the indicator bound is stated."""
    return math.sqrt(dt) * h ** (0.5 * gamma)
