#!/usr/bin/env python3
"""
Closed-form sum-rate bounds, MMSE coefficients and gap calculus.

All rates are in bits per channel use (log base 2). Decoder-2 quantities
are computed as decoder-1 quantities of the mirrored parameters.
"""

import logging
import math
from dataclasses import asdict, dataclass, field
from enum import Enum
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from envelope import DEFAULT_BOOST_CAP, DEFAULT_GRID_DENSITY, RateFunction, uce_at_power
from errors import (
    ConditionNotMetError,
    NoApplicableRegimeError,
    NonPositiveValueError,
    UnboundedStateError,
)
from model import DECODERS, ChannelParams, RegimeFlags, StateVariance, classify_regime, is_unbounded

logger = logging.getLogger(__name__)

TWO_PI_E = 2.0 * math.pi * math.e
MIXED_REGIME_MIN_POWER = 1.0


class BoundKind(str, Enum):
    OUTER = "outer"
    CAPACITY = "capacity"
    ACHIEVABLE_RAW = "achievable-raw"
    ACHIEVABLE_ENVELOPED = "achievable-enveloped"


class ReceiverForm(str, Enum):
    """Shape of the effective noise after the receiver's modulo reduction."""

    THM2 = "thm2"
    MOD_LAMBDA3 = "mod-lambda3"
    MOD_LAMBDA1 = "mod-lambda1"


@dataclass(frozen=True)
class SumRateBound:
    """A sum-rate value with the regime it was computed under."""

    value: float
    kind: BoundKind
    limiting_decoder: int
    conditions: RegimeFlags
    warnings: List[str] = field(default_factory=list)

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data["kind"] = self.kind.value
        return data


@dataclass(frozen=True)
class RatePoint:
    r1: float
    r2: float

    def __post_init__(self) -> None:
        if self.r1 < 0 or self.r2 < 0:
            raise ValueError(f"Rate point must be componentwise >= 0, got ({self.r1}, {self.r2})")

    @property
    def sum_rate(self) -> float:
        return self.r1 + self.r2


@dataclass(frozen=True)
class MmseCoeffs:
    """MMSE scaling coefficients; ``alpha`` for Thm-2 schemes, the pair otherwise."""

    decoder: int
    alpha: Optional[float] = None
    alpha1: Optional[float] = None
    alpha2: Optional[float] = None

    def as_tuple(self) -> Tuple[float, ...]:
        if self.alpha is not None:
            return (self.alpha,)
        return (self.alpha1, self.alpha2)


@dataclass(frozen=True)
class BinningBound:
    """Upper bound on the sum rate of random binning with Gaussian states.

    ``alpha1``/``alpha2`` are the Costa coefficients behind the closed form,
    kept for reference; the closed form itself uses their high-SNR limit.
    """

    gamma: float
    entropy_term: float
    value: float
    q1: float
    q2: float
    alpha1: float
    alpha2: float


@dataclass(frozen=True)
class GapRow:
    x: float
    term_outer: float
    term_inner_raw: float
    term_inner_env: float
    gap: float

    def to_dict(self) -> Dict[str, float]:
        return asdict(self)


def _half_log2(value: float) -> float:
    return 0.5 * math.log2(value)


def _ratio(numerator: float, denominator: float) -> float:
    """numerator / denominator for a positive numerator; inf in the noiseless limit."""
    return math.inf if denominator == 0.0 else numerator / denominator


def _positive(value: float) -> float:
    return value if value > 0.0 else 0.0


def outer_branch(params: ChannelParams, decoder: int) -> float:
    """0.5 log2(1 + a12 P2 / N1) from ``decoder``'s side."""
    p = params.for_decoder(decoder)
    return _half_log2(1.0 + _ratio(p.a12 * p.p2, p.n1))


def outer_sum_rate(params: ChannelParams) -> SumRateBound:
    """Outer bound on R1 + R2 under strong interference.

    Example:
        >>> outer_sum_rate(build_params(1, 1, 1, 1, 1, 1)).value
        0.5
    """
    branches = [outer_branch(params, d) for d in DECODERS]
    limiting = 1 if branches[0] <= branches[1] else 2
    return SumRateBound(
        value=branches[limiting - 1],
        kind=BoundKind.OUTER,
        limiting_decoder=limiting,
        conditions=classify_regime(params),
    )


def imbalanced_sum_rate(params: ChannelParams, decoder: int = 1) -> SumRateBound:
    """Sum capacity seen by ``decoder`` when its SNRs are imbalanced.

    Raises:
        ConditionNotMetError: If the decoder's imbalanced condition does not hold
    """
    flags = classify_regime(params)
    if not flags.imbalanced(decoder):
        raise ConditionNotMetError(
            f"Imbalanced condition does not hold at decoder {decoder}; "
            "use the balanced formula instead"
        )
    return SumRateBound(
        value=outer_branch(params, decoder),
        kind=BoundKind.CAPACITY,
        limiting_decoder=decoder,
        conditions=flags,
    )


def balanced_rate_function(params: ChannelParams, decoder: int = 1) -> RateFunction:
    """Vectorised clipped balanced rate of ``decoder`` as a function of (p_own, p_other)."""
    p = params.for_decoder(decoder)
    return _alignment_rate_function(p.n1, p.a12)


def _balanced_raw_value(params: ChannelParams, decoder: int) -> float:
    p = params.for_decoder(decoder)
    cross = p.a12 * p.p2
    ratio = _ratio(p.p1 + cross + p.n1, 2.0 * p.n1 + (math.sqrt(p.p1) - math.sqrt(cross)) ** 2)
    return _positive(_half_log2(ratio))


def balanced_raw_rate(params: ChannelParams, decoder: int = 1) -> SumRateBound:
    """Clipped lattice-alignment sum rate of ``decoder`` before enveloping.

    Raises:
        ConditionNotMetError: If the decoder's balanced condition does not hold
    """
    flags = classify_regime(params)
    if not flags.balanced(decoder):
        raise ConditionNotMetError(f"Balanced condition does not hold at decoder {decoder}")
    warnings: List[str] = []
    if flags.equality(decoder):
        warnings.append(
            f"decoder {decoder}: equal received powers are excluded from the balanced region"
        )
        logger.warning(
            "Evaluating balanced rate at an excluded equality point", extra={"decoder": decoder}
        )
    return SumRateBound(
        value=_balanced_raw_value(params, decoder),
        kind=BoundKind.ACHIEVABLE_RAW,
        limiting_decoder=decoder,
        conditions=flags,
        warnings=warnings,
    )


def mmse_alpha_thm2(params: ChannelParams, decoder: int = 1) -> MmseCoeffs:
    """alpha = a12 P2 / (a12 P2 + N1) for the imbalanced schemes."""
    p = params.for_decoder(decoder)
    cross = p.a12 * p.p2
    return MmseCoeffs(decoder=decoder, alpha=cross / (cross + p.n1))


def mmse_alphas_thm3(params: ChannelParams, decoder: int = 1) -> MmseCoeffs:
    """(alpha1, alpha2) pair for the balanced schemes.

    alpha1 may exceed 1 (e.g. P1=4, a12 P2=1, N1=0 gives 1.2).
    """
    p = params.for_decoder(decoder)
    cross = p.a12 * p.p2
    common = (math.sqrt(p.p1) + math.sqrt(cross)) / (p.p1 + cross + p.n1)
    return MmseCoeffs(
        decoder=decoder,
        alpha1=math.sqrt(p.p1) * common,
        alpha2=math.sqrt(cross) * common,
    )


def decoder_sum_rate(
    params: ChannelParams,
    decoder: int,
    grid_density: int = DEFAULT_GRID_DENSITY,
    boost_cap: float = DEFAULT_BOOST_CAP,
    flags: Optional[RegimeFlags] = None,
) -> SumRateBound:
    """Best closed-form sum rate available to one decoder.

    Capacity when the decoder is imbalanced, otherwise the enveloped
    balanced rate.

    Raises:
        NoApplicableRegimeError: If neither condition holds
    """
    flags = flags or classify_regime(params)
    if flags.imbalanced(decoder):
        return SumRateBound(outer_branch(params, decoder), BoundKind.CAPACITY, decoder, flags)
    if flags.balanced(decoder):
        p = params.for_decoder(decoder)
        value = uce_at_power(
            balanced_rate_function(params, decoder), p.p1, p.p2, grid_density, boost_cap
        )
        value = max(value, _balanced_raw_value(params, decoder))
        return SumRateBound(value, BoundKind.ACHIEVABLE_ENVELOPED, decoder, flags)
    raise NoApplicableRegimeError(
        f"Decoder {decoder} satisfies neither the imbalanced nor the balanced condition"
    )


def achievable_sum_rate(
    params: ChannelParams,
    grid_density: int = DEFAULT_GRID_DENSITY,
    boost_cap: float = DEFAULT_BOOST_CAP,
) -> SumRateBound:
    """Achievable sum rate: per-decoder closed form, then the minimum over decoders.

    Raises:
        NoApplicableRegimeError: If some decoder has no applicable regime
    """
    flags = classify_regime(params)
    per_decoder = [decoder_sum_rate(params, d, grid_density, boost_cap, flags) for d in DECODERS]
    limiting = 1 if per_decoder[0].value <= per_decoder[1].value else 2

    kinds = {b.kind for b in per_decoder}
    kind = BoundKind.CAPACITY if kinds == {BoundKind.CAPACITY} else BoundKind.ACHIEVABLE_ENVELOPED

    warnings: List[str] = []
    for decoder in DECODERS:
        enveloped = per_decoder[decoder - 1].kind is BoundKind.ACHIEVABLE_ENVELOPED
        if enveloped and flags.equality(decoder):
            warnings.append(
                f"decoder {decoder}: equal received powers are excluded from the balanced region"
            )
    if len(kinds) == 2 and min(params.p1, params.p2) < MIXED_REGIME_MIN_POWER:
        warnings.append("mixed-regime result assumes P1, P2 >= 1; hypothesis not met")
    for message in warnings:
        logger.warning(message)

    return SumRateBound(
        value=per_decoder[limiting - 1].value,
        kind=kind,
        limiting_decoder=limiting,
        conditions=flags,
        warnings=warnings,
    )


def corner_points(
    params: ChannelParams,
    decoder: int,
    grid_density: int = DEFAULT_GRID_DENSITY,
    boost_cap: float = DEFAULT_BOOST_CAP,
) -> Tuple[RatePoint, RatePoint]:
    """The two corner points (0, R) and (R, 0) of ``decoder``'s sum-rate face."""
    value = decoder_sum_rate(params, decoder, grid_density, boost_cap).value
    return RatePoint(0.0, value), RatePoint(value, 0.0)


def time_sharing_segment(
    params: ChannelParams,
    decoder: int,
    steps: int = 11,
    grid_density: int = DEFAULT_GRID_DENSITY,
    boost_cap: float = DEFAULT_BOOST_CAP,
) -> List[RatePoint]:
    """Rate pairs lam * c1 + (1 - lam) * c2 between the decoder's corner points."""
    if steps < 2:
        raise ValueError(f"steps must be >= 2, got {steps}")
    first, second = corner_points(params, decoder, grid_density, boost_cap)
    points = []
    for lam in np.linspace(0.0, 1.0, steps):
        points.append(
            RatePoint(
                float(lam * first.r1 + (1.0 - lam) * second.r1),
                float(lam * first.r2 + (1.0 - lam) * second.r2),
            )
        )
    return points


def gap_symmetric(
    power: float,
    noise: float,
    gain: float,
    grid_density: int = DEFAULT_GRID_DENSITY,
    boost_cap: float = DEFAULT_BOOST_CAP,
) -> float:
    """Outer bound minus enveloped achievable rate for the symmetric channel.

    Raises:
        NonPositiveValueError: If P or N is not positive
        ConditionNotMetError: If a < 1 or N < (sqrt(a) - 1) P
    """
    if not (power > 0 and noise > 0):
        raise NonPositiveValueError(f"P and N must be > 0, got P={power}, N={noise}")
    if gain < 1.0:
        raise ConditionNotMetError(f"Symmetric gap needs a >= 1, got {gain}")
    if noise < (math.sqrt(gain) - 1.0) * power:
        raise ConditionNotMetError(
            f"Symmetric gap needs N >= (sqrt(a) - 1) P, got N={noise}, P={power}, a={gain}"
        )
    outer = _half_log2(1.0 + gain * power / noise)
    denominator = 2.0 * noise + power * (1.0 - math.sqrt(gain)) ** 2
    raw = _positive(_half_log2((power * (1.0 + gain) + noise) / denominator))
    fn = _alignment_rate_function(noise, gain)
    inner = max(raw, uce_at_power(fn, power, power, grid_density, boost_cap))
    return outer - inner


def _alignment_rate_function(noise: float, gain: float) -> RateFunction:
    """[0.5 log2((p1 + a p2 + N) / (2N + (sqrt(p1) - sqrt(a p2))^2))]^+ on arrays."""

    def rate(p1, p2):
        p1 = np.asarray(p1, dtype=float)
        cross = gain * np.asarray(p2, dtype=float)
        ratio = (p1 + cross + noise) / (2.0 * noise + (np.sqrt(p1) - np.sqrt(cross)) ** 2)
        return np.maximum(0.5 * np.log2(ratio), 0.0)

    return rate


def gap_tilde(
    x: float,
    grid_density: int = DEFAULT_GRID_DENSITY,
    boost_cap: float = DEFAULT_BOOST_CAP,
) -> GapRow:
    """Worst-case symmetric gap at SNR x = P/N, with a = ((P + N)/P)^2.

    Example:
        >>> round(gap_tilde(1.0).gap, 3)
        0.661
    """
    if not x > 0:
        raise ValueError(f"x must be > 0, got {x}")
    term_outer = _half_log2(1.0 + (x + 1.0) ** 2 / x)
    term_inner_raw = _positive(_half_log2((2.0 * x * x + 3.0 * x + 1.0) / (2.0 * x + 1.0)))
    gain = ((x + 1.0) / x) ** 2
    enveloped = uce_at_power(_alignment_rate_function(1.0, gain), x, x, grid_density, boost_cap)
    term_inner_env = max(term_inner_raw, enveloped)
    return GapRow(
        x=x,
        term_outer=term_outer,
        term_inner_raw=term_inner_raw,
        term_inner_env=term_inner_env,
        gap=term_outer - term_inner_env,
    )


def gap_curve(
    x_min: float,
    x_max: float,
    steps: int,
    grid_density: int = DEFAULT_GRID_DENSITY,
    boost_cap: float = DEFAULT_BOOST_CAP,
) -> List[GapRow]:
    """GapRow on a log grid of ``steps`` points over [x_min, x_max]."""
    if not 0 < x_min < x_max or steps < 2:
        raise ValueError(f"Need 0 < xmin < xmax and steps >= 2, got {x_min}, {x_max}, {steps}")
    xs = np.geomspace(x_min, x_max, steps)
    return [gap_tilde(float(x), grid_density, boost_cap) for x in xs]


def binning_sum_rate_bound(
    params: ChannelParams,
    q1: Optional[StateVariance] = None,
    q2: Optional[StateVariance] = None,
    decoder: int = 1,
) -> BinningBound:
    """Upper bound on the random-binning sum rate with Gaussian states.

    Args:
        params: Channel parameters
        q1, q2: State variances (default: taken from params)
        decoder: Which multiple-access channel the bound is evaluated at

    Raises:
        UnboundedStateError: If a state variance is unbounded
    """
    q1 = params.q1 if q1 is None else q1
    q2 = params.q2 if q2 is None else q2
    if is_unbounded(q1) or is_unbounded(q2):
        raise UnboundedStateError(
            "Binning bound needs finite state variances; the unbounded limit is 0"
        )
    q1, q2 = float(q1), float(q2)
    if not (q1 > 0 and q2 > 0):
        raise NonPositiveValueError(f"State variances must be > 0, got {q1}, {q2}")

    p = params.for_decoder(decoder)
    gamma = _half_log2(_ratio(TWO_PI_E * p.p1 * p.p2, p.n1))
    entropy_term = _half_log2((q1 + q2) / (q1 * q2))
    return BinningBound(
        gamma=gamma,
        entropy_term=entropy_term,
        value=_positive(entropy_term + gamma),
        q1=q1,
        q2=q2,
        alpha1=p.p1 / (p.p1 + p.n1),
        alpha2=_ratio(p.a12 * p.p2, p.a12 * p.p2 + p.n1) if p.a12 > 0 else 0.0,
    )


def binning_vanishing_threshold(params: ChannelParams, decoder: int = 1) -> float:
    """Equal state variance Q* at which the binning bound reaches 0: 2 * 2^(2 Gamma)."""
    p = params.for_decoder(decoder)
    gamma = _half_log2(_ratio(TWO_PI_E * p.p1 * p.p2, p.n1))
    return 2.0 * 2.0 ** (2.0 * gamma)


def effective_noise_variance(
    form: ReceiverForm,
    a12: float,
    sigma2_1: float,
    sigma2_2: float,
    n1: float,
    alpha1: float,
    alpha2: Optional[float] = None,
) -> float:
    """Second moment of the effective noise before its final modulo reduction.

    Args:
        form: THM2 uses ``alpha1`` as alpha; the Thm-3 forms use the pair
        a12: Interference gain at this decoder
        sigma2_1, sigma2_2: Second moments of the two coarse lattices
        n1: Noise variance at this decoder
        alpha1, alpha2: Scaling coefficients

    The X2 term always carries a12 P2, including the appendix corner point
    whose printed derivation writes a12 P1.
    """
    if form is ReceiverForm.THM2:
        alpha = alpha1
        return a12 * (alpha - 1.0) ** 2 * sigma2_2 + alpha**2 * n1
    if alpha2 is None:
        raise ValueError(f"{form.value} needs both alpha1 and alpha2")
    if form is ReceiverForm.MOD_LAMBDA3:
        ratio = alpha2 / alpha1
        return (
            a12 * (alpha2 - 1.0) ** 2 * sigma2_2
            + ((1.0 - alpha1) * ratio) ** 2 * sigma2_1
            + alpha2**2 * n1
        )
    ratio = alpha1 / alpha2
    return (
        (alpha1 - 1.0) ** 2 * sigma2_1
        + ((1.0 - alpha2) * ratio) ** 2 * a12 * sigma2_2
        + alpha1**2 * n1
    )


def lattice_rate_lower_bound(out_sigma2: float, zeff_var: float, lattice_nsm: float) -> float:
    """Finite-dimension rate of a modulo-lattice channel with Gaussian-like noise.

    0.5 log2(sigma2(out) / sigma2_eff) minus the shaping loss 0.5 log2(2 pi e G).
    """
    if zeff_var <= 0.0:
        return math.inf
    return _positive(_half_log2(out_sigma2 / zeff_var) - _half_log2(TWO_PI_E * lattice_nsm))
