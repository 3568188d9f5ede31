#!/usr/bin/env python3
"""
Channel parameters and regime classification for the additive
state-dependent Gaussian interference channel.

Two transmitter/receiver pairs share the channel

    Y1 = X1 + sqrt(a12) X2 + S1 + sqrt(a12) S2 + Z1
    Y2 = sqrt(a21) X1 + X2 + sqrt(a21) S1 + S2 + Z2

where the states S1, S2 are known non-causally at the transmitters only.
Everything in this module is a pure value type or a pure function.
"""

import logging
import math
from dataclasses import asdict, dataclass, field, replace
from enum import Enum
from typing import Any, Dict, List, Union

from errors import (
    InvalidDecoderError,
    NegativeGainError,
    NonFiniteValueError,
    NonPositiveValueError,
)

logger = logging.getLogger(__name__)


class Unbounded(str, Enum):
    """Marker for a state whose variance grows without bound."""

    UNBOUNDED = "unbounded"


UNBOUNDED = Unbounded.UNBOUNDED

StateVariance = Union[float, Unbounded]

DECODERS = (1, 2)


def is_unbounded(value: Any) -> bool:
    """Return True when ``value`` is the unbounded-state marker."""
    return isinstance(value, Unbounded) or value == UNBOUNDED.value


@dataclass(frozen=True)
class ChannelParams:
    """All channel constants, validated on construction.

    Attributes:
        p1, p2: Transmit powers (linear, per channel use)
        n1, n2: Receiver noise variances
        a12, a21: Interference link power gains
        q1, q2: State variances, or ``UNBOUNDED``
        zero_noise_limit: Accept n1 = 0 / n2 = 0 (noiseless diagnostic limit)

    Construct through :func:`build_params` rather than directly.
    """

    p1: float
    p2: float
    n1: float
    n2: float
    a12: float
    a21: float
    q1: StateVariance = UNBOUNDED
    q2: StateVariance = UNBOUNDED
    zero_noise_limit: bool = field(default=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        for name in ("p1", "p2", "n1", "n2", "a12", "a21", "q1", "q2"):
            value = getattr(self, name)
            if not is_unbounded(value) and not math.isfinite(float(value)):
                raise NonFiniteValueError(f"{name} must be finite, got {value}")
        for name in ("p1", "p2"):
            if not getattr(self, name) > 0:
                raise NonPositiveValueError(f"{name} must be > 0, got {getattr(self, name)}")
        for name in ("n1", "n2"):
            value = getattr(self, name)
            if self.zero_noise_limit:
                if not value >= 0:
                    raise NonPositiveValueError(f"{name} must be >= 0, got {value}")
            elif not value > 0:
                raise NonPositiveValueError(f"{name} must be > 0, got {value}")
        for name in ("a12", "a21"):
            if not getattr(self, name) >= 0:
                raise NegativeGainError(f"{name} must be >= 0, got {getattr(self, name)}")
        for name in ("q1", "q2"):
            value = getattr(self, name)
            if is_unbounded(value):
                object.__setattr__(self, name, UNBOUNDED)
            elif not float(value) > 0:
                raise NonPositiveValueError(f"{name} must be > 0 or 'unbounded', got {value}")

    @property
    def strong_interference(self) -> bool:
        """a12 >= N1/N2 and a21 >= N2/N1, cross-multiplied so N = 0 is defined."""
        return self.a12 * self.n2 >= self.n1 and self.a21 * self.n1 >= self.n2

    def power(self, user: int) -> float:
        return self.p1 if user == 1 else self.p2

    def mirrored(self) -> "ChannelParams":
        """Swap the user labels so that decoder 2 can be evaluated as decoder 1."""
        return replace(
            self,
            p1=self.p2,
            p2=self.p1,
            n1=self.n2,
            n2=self.n1,
            a12=self.a21,
            a21=self.a12,
            q1=self.q2,
            q2=self.q1,
        )

    def for_decoder(self, decoder: int) -> "ChannelParams":
        """Parameters seen from ``decoder``'s side (identity for decoder 1)."""
        _check_decoder(decoder)
        return self if decoder == 1 else self.mirrored()

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data.pop("zero_noise_limit")
        for name in ("q1", "q2"):
            if is_unbounded(data[name]):
                data[name] = UNBOUNDED.value
        data["strong_interference"] = self.strong_interference
        return data


@dataclass(frozen=True)
class RegimeFlags:
    """Which closed form applies at each decoder.

    ``imbalanced`` selects the capacity corner points, ``balanced`` the
    enveloped lattice-alignment region. Both can hold on the boundary.
    """

    imbalanced_dec1: bool
    imbalanced_dec2: bool
    balanced_dec1: bool
    balanced_dec2: bool
    equality_dec1: bool = False
    equality_dec2: bool = False
    strong_interference: bool = True
    notes: List[str] = field(default_factory=list)

    def imbalanced(self, decoder: int) -> bool:
        return self.imbalanced_dec1 if decoder == 1 else self.imbalanced_dec2

    def balanced(self, decoder: int) -> bool:
        return self.balanced_dec1 if decoder == 1 else self.balanced_dec2

    def equality(self, decoder: int) -> bool:
        return self.equality_dec1 if decoder == 1 else self.equality_dec2

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


def _check_decoder(decoder: int) -> None:
    if decoder not in DECODERS:
        raise InvalidDecoderError(f"decoder must be 1 or 2, got {decoder}")


def build_params(
    p1: float,
    p2: float,
    n1: float,
    n2: float,
    a12: float,
    a21: float,
    q1: StateVariance = UNBOUNDED,
    q2: StateVariance = UNBOUNDED,
    allow_zero_noise: bool = False,
) -> ChannelParams:
    """Validate raw values and return a ChannelParams.

    Args:
        p1, p2: Transmit powers
        n1, n2: Noise variances
        a12, a21: Interference gains
        q1, q2: State variances (number or "unbounded")
        allow_zero_noise: Accept zero noise for noiseless-limit diagnostics

    Returns:
        Validated ChannelParams

    Raises:
        NonPositiveValueError: If a power, noise or finite state variance is <= 0
        NegativeGainError: If a gain is negative
        NonFiniteValueError: If any value is infinite or NaN (use "unbounded" for states)

    Example:
        >>> params = build_params(1, 1, 1, 1, 1, 1)
        >>> params.strong_interference
        True
    """
    params = ChannelParams(
        p1=float(p1),
        p2=float(p2),
        n1=float(n1),
        n2=float(n2),
        a12=float(a12),
        a21=float(a21),
        q1=q1 if is_unbounded(q1) else float(q1),
        q2=q2 if is_unbounded(q2) else float(q2),
        zero_noise_limit=allow_zero_noise,
    )
    if not params.strong_interference:
        logger.warning(
            "Parameters are outside the strong-interference regime",
            extra={"a12": params.a12, "a21": params.a21, "n1": params.n1, "n2": params.n2},
        )
    return params


def imbalance_threshold(params: ChannelParams, decoder: int = 1) -> float:
    """Right-hand side of the imbalanced condition: sqrt(a12 P2 P1) - a12 P2."""
    p = params.for_decoder(decoder)
    return math.sqrt(p.a12 * p.p2 * p.p1) - p.a12 * p.p2


def balance_threshold(params: ChannelParams, decoder: int = 1) -> float:
    """Right-hand side of the balanced condition: sqrt(a12 P2 P1) - min(a12 P2, P1)."""
    p = params.for_decoder(decoder)
    return math.sqrt(p.a12 * p.p2 * p.p1) - min(p.a12 * p.p2, p.p1)


def classify_regime(params: ChannelParams) -> RegimeFlags:
    """Evaluate the imbalanced / balanced conditions for both decoders.

    The inequalities are evaluated exactly as written, without slack, so a
    parameter set placed on the boundary sets both flags of that decoder.
    """
    flags: Dict[str, bool] = {}
    notes: List[str] = []
    for decoder in DECODERS:
        p = params.for_decoder(decoder)
        own, cross = (1, 2) if decoder == 1 else (2, 1)
        imbalanced = p.n1 <= imbalance_threshold(params, decoder)
        balanced = p.n1 >= balance_threshold(params, decoder)
        equality = p.p1 == p.a12 * p.p2
        flags[f"imbalanced_dec{decoder}"] = imbalanced
        flags[f"balanced_dec{decoder}"] = balanced
        flags[f"equality_dec{decoder}"] = equality

        if imbalanced:
            notes.append(
                f"decoder {decoder}: N{own} <= sqrt(a{own}{cross} P{cross} P{own}) - "
                f"a{own}{cross} P{cross} (capacity corner points)"
            )
        if balanced:
            notes.append(
                f"decoder {decoder}: N{own} >= sqrt(a{own}{cross} P{cross} P{own}) - "
                f"min(a{own}{cross} P{cross}, P{own}) (lattice alignment region)"
            )
        if not imbalanced and not balanced:
            notes.append(f"decoder {decoder}: no closed-form regime applies")
        if equality:
            notes.append(
                f"decoder {decoder}: P{own} = a{own}{cross} P{cross} is excluded from the "
                "balanced region; formula evaluated by continuity"
            )

    if not params.strong_interference:
        notes.append("parameters are not in the strong-interference regime")

    return RegimeFlags(
        strong_interference=params.strong_interference,
        notes=notes,
        **flags,
    )
