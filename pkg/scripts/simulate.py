#!/usr/bin/env python3
"""
Monte-Carlo simulation of the dithered modulo-lattice transceiver chains.

Each scheme is simulated from decoder 1's point of view; decoder 2 runs the
same chain on mirrored parameters, so every index in a SimResult is relative
to the simulated decoder. For every trial the literal receiver output is
computed from the channel output, and independently the aligned reduced
form ``[m V + Zeff] mod Lambda_out`` is computed from the transmitted
signals. Their torus distance is the alignment residual.

Trials are split into stream blocks of STREAM_BLOCK consecutive trials. Block
b draws from a Philox stream jumped b times, so the randomness of trial i
depends only on (seed, i). Worker jobs take whole blocks (``chunk_size``
trials rounded up to a block multiple), and per-block partial sums are
combined in block order with ``math.fsum``. Results are therefore bitwise
independent of both worker count and chunk size.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from enum import Enum
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from bounds import (
    ReceiverForm,
    effective_noise_variance,
    lattice_rate_lower_bound,
    mmse_alpha_thm2,
    mmse_alphas_thm3,
)
from errors import (
    InvalidDecoderError,
    InvalidGridError,
    LatticeRelationViolatedError,
    NonPositiveScaleError,
    UnboundedStateError,
    UnsupportedFamilyError,
    UnsupportedSchemeError,
)
from lattice import (
    DEFAULT_MC_SAMPLES,
    Lattice,
    LatticeFamily,
    make_lattice,
    mod_lattice,
    nearest_point,
    nsm,
    parse_family,
    sample_dither,
    scale,
    scale_to_second_moment,
    shaping_loss_bits,
)
from model import ChannelParams, is_unbounded
from utils import config_hash

logger = logging.getLogger(__name__)

DEFAULT_CHUNK_SIZE = 4096
STREAM_BLOCK = 1024
DEFAULT_TRIALS = 10_000
MIN_NOISE_TRIALS = 10_000
MIN_SWEEP_POINTS = 11
MAX_SWEEP_ALPHA = 1.5
POWER_BUDGET_SLACK = 1e-9
SE_FACTOR = 4.0


class Scheme(str, Enum):
    THM2_CORNER_R2 = "thm2-corner-R2"
    THM2_CORNER_R1 = "thm2-corner-R1"
    THM3_CORNER_R2 = "thm3-corner-R2"
    THM3_CORNER_R2_VARIANT2 = "thm3-corner-R2-variant2"
    THM3_CORNER_R1_APPENDIX2 = "thm3-corner-R1-appendix2"
    THM3_CORNER_R1_APPENDIX2_VARIANT2 = "thm3-corner-R1-appendix2-variant2"

    @property
    def uses_single_alpha(self) -> bool:
        return self in (Scheme.THM2_CORNER_R2, Scheme.THM2_CORNER_R1)


class StateMode(str, Enum):
    GAUSSIAN = "gaussian"
    VORONOI_UNIFORM = "voronoi-uniform"


# receiver form and (output lattice, message lattice, message scale) per scheme
RECEIVER_FORMS: Dict[Scheme, ReceiverForm] = {
    Scheme.THM2_CORNER_R2: ReceiverForm.THM2,
    Scheme.THM2_CORNER_R1: ReceiverForm.THM2,
    Scheme.THM3_CORNER_R2: ReceiverForm.MOD_LAMBDA3,
    Scheme.THM3_CORNER_R2_VARIANT2: ReceiverForm.MOD_LAMBDA1,
    Scheme.THM3_CORNER_R1_APPENDIX2: ReceiverForm.MOD_LAMBDA1,
    Scheme.THM3_CORNER_R1_APPENDIX2_VARIANT2: ReceiverForm.MOD_LAMBDA3,
}


def parse_scheme(value) -> Scheme:
    try:
        return Scheme(value)
    except ValueError:
        raise UnsupportedSchemeError(
            f"Unknown scheme '{value}'. Expected one of: {', '.join(s.value for s in Scheme)}"
        )


@dataclass(frozen=True)
class StateSpec:
    """How the interference states are drawn.

    ``value`` is the Gaussian variance (None: use the channel's q1/q2) or the
    Voronoi scale factor (None: 1.0).
    """

    mode: StateMode = StateMode.GAUSSIAN
    value: Optional[float] = None


@dataclass(frozen=True)
class SchemeSpec:
    """One simulated transceiver configuration.

    Lambda2 is the family lattice scaled to second moment P2, Lambda3 is
    sqrt(a12) Lambda2 and Lambda1 is derived from Lambda3 through the
    scheme's coefficients.
    """

    scheme: Scheme
    decoder: int = 1
    family: LatticeFamily = LatticeFamily.INTEGER_CUBIC
    dim: int = 1
    alphas: Optional[Tuple[float, ...]] = None
    trials: int = DEFAULT_TRIALS
    seed: int = 0
    state: StateSpec = field(default_factory=StateSpec)
    chunk_size: int = DEFAULT_CHUNK_SIZE
    lattice_samples: int = DEFAULT_MC_SAMPLES
    lattice_seed: int = 0

    def __post_init__(self) -> None:
        object.__setattr__(self, "scheme", parse_scheme(self.scheme))
        object.__setattr__(self, "family", parse_family(self.family))
        if self.decoder not in (1, 2):
            raise InvalidDecoderError(f"decoder must be 1 or 2, got {self.decoder}")
        if self.trials < 1:
            raise ValueError(f"trials must be >= 1, got {self.trials}")
        if self.seed < 0:
            raise ValueError(f"seed must be >= 0, got {self.seed}")
        if self.chunk_size < 1:
            raise ValueError(f"chunk_size must be >= 1, got {self.chunk_size}")
        if self.alphas is not None:
            object.__setattr__(self, "alphas", tuple(float(a) for a in self.alphas))

    def to_dict(self) -> Dict[str, Any]:
        return {
            "scheme": self.scheme.value,
            "decoder": self.decoder,
            "family": self.family.value,
            "dim": self.dim,
            "alphas": list(self.alphas) if self.alphas is not None else None,
            "trials": self.trials,
            "seed": self.seed,
            "state_mode": self.state.mode.value,
            "state_value": self.state.value,
            "chunk_size": self.chunk_size,
        }


@dataclass(frozen=True, eq=False)
class LatticeChain:
    """The nested lattices of one scheme and its receiver bookkeeping."""

    lam1: Lattice
    lam2: Lattice
    lam3: Lattice
    out: Lattice
    msg: Lattice
    msg_scale: float
    alphas: Tuple[float, ...]
    form: ReceiverForm
    sqrt_gain: float
    power_budget_ok: bool


@dataclass(frozen=True, eq=False)
class TrialTrace:
    """Per-trial signals of one block, each an (m, n) array."""

    s1: np.ndarray
    s2: np.ndarray
    d1: np.ndarray
    d2: np.ndarray
    v: np.ndarray
    x1: np.ndarray
    x2: np.ndarray
    z1: np.ndarray
    y1: np.ndarray
    yd1: np.ndarray
    zeff_pre: np.ndarray
    zeff: np.ndarray
    reduced_form: np.ndarray

    def alignment_residual(self, out: Lattice) -> np.ndarray:
        """Relative torus distance between the literal output and the reduced form."""
        gap = np.abs(mod_lattice(out, self.yd1 - self.reduced_form)).max(axis=1)
        return gap / (1.0 + np.abs(self.yd1).max(axis=1))


@dataclass
class _Moments:
    total: float = 0.0
    total_sq: float = 0.0

    def add(self, values: np.ndarray) -> None:
        self.total += float(np.sum(values))
        self.total_sq += float(np.sum(values * values))


@dataclass
class BlockStats:
    count: int
    x1_power: _Moments
    x2_power: _Moments
    zeff_pre: _Moments
    zeff_post: _Moments
    max_residual: float
    errors: int = 0


@dataclass(frozen=True)
class SimResult:
    """Measured statistics of one simulation run (indices relative to the decoder)."""

    scheme: str
    decoder: int
    family: str
    dim: int
    trials: int
    seed: int
    state_mode: str
    alphas: Tuple[float, ...]
    x1_power: float
    x1_power_se: float
    x2_power: float
    x2_power_se: float
    sigma2_lambda1: float
    sigma2_lambda2: float
    zeff_pre_var: float
    zeff_pre_se: float
    zeff_post_var: float
    zeff_post_se: float
    predicted_pre_var: float
    max_alignment_residual: float
    sigma2_out: float
    shaping_loss_bits: float
    rate_lower_bound_bits: float
    power_budget_ok: bool
    post_within_pre: bool
    nesting_exponent: Optional[int] = None
    ser: Optional[float] = None
    ser_se: Optional[float] = None

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


@dataclass(frozen=True)
class EffectiveNoise:
    pre_mod_var: float
    post_mod_var: float
    predicted_pre_var: float
    pre_mod_se: float
    post_mod_se: float


@dataclass(frozen=True)
class SweepResult:
    """Empirical pre-modulo effective-noise variance along a coefficient grid."""

    grid: Tuple[float, ...]
    variances: Tuple[float, ...]
    stderrs: Tuple[float, ...]
    argmin: float
    closed_form: float

    def rows(self) -> List[Dict[str, Any]]:
        return [
            {"alpha": a, "pre_mod_var": v, "pre_mod_se": s, "is_argmin": a == self.argmin}
            for a, v, s in zip(self.grid, self.variances, self.stderrs)
        ]


def default_state(q1, q2) -> StateSpec:
    """Gaussian states when both variances are finite, bounded Voronoi states otherwise."""
    if is_unbounded(q1) or is_unbounded(q2):
        return StateSpec(StateMode.VORONOI_UNIFORM, 1.0)
    return StateSpec(StateMode.GAUSSIAN)


def sample_state(
    state: StateSpec,
    lat: Lattice,
    rng: np.random.Generator,
    size: Optional[int] = None,
    variance=None,
) -> np.ndarray:
    """Draw interference states for the user whose coarse lattice is ``lat``.

    Args:
        state: Gaussian or Voronoi-uniform mode
        lat: That user's coarse lattice (Voronoi mode draws from c * its cell)
        rng: Random generator
        size: Batch size (None for a single n-vector)
        variance: Fallback Gaussian variance when ``state.value`` is None

    Raises:
        UnboundedStateError: Gaussian mode without a finite variance
    """
    shape = (lat.n,) if size is None else (size, lat.n)
    if state.mode is StateMode.GAUSSIAN:
        q = state.value if state.value is not None else variance
        if q is None or is_unbounded(q):
            raise UnboundedStateError("Gaussian states need a finite variance")
        return rng.normal(0.0, math.sqrt(float(q)), shape)
    c = 1.0 if state.value is None else state.value
    return sample_dither(scale(lat, c), rng, size)


def _resolve_alphas(view: ChannelParams, spec: SchemeSpec) -> Tuple[float, ...]:
    expected = 1 if spec.scheme.uses_single_alpha else 2
    if spec.alphas is not None:
        if len(spec.alphas) != expected:
            raise LatticeRelationViolatedError(
                f"{spec.scheme.value} takes {expected} coefficient(s), got {len(spec.alphas)}"
            )
        alphas = spec.alphas
    elif expected == 1:
        alphas = mmse_alpha_thm2(view).as_tuple()
    else:
        alphas = mmse_alphas_thm3(view).as_tuple()
    if not all(a > 0 for a in alphas):
        raise LatticeRelationViolatedError(f"Scaling coefficients must be > 0, got {alphas}")
    return tuple(alphas)


def build_chain(view: ChannelParams, spec: SchemeSpec) -> LatticeChain:
    """Derive Lambda1, Lambda2, Lambda3 and the output/message lattices of a scheme.

    Args:
        view: Parameters seen from the simulated decoder
        spec: Scheme configuration

    Raises:
        LatticeRelationViolatedError: If a scale in the chain is not positive
    """
    alphas = _resolve_alphas(view, spec)
    sqrt_gain = math.sqrt(view.a12)
    try:
        base = make_lattice(
            spec.family, spec.dim, samples=spec.lattice_samples, seed=spec.lattice_seed
        )
        lam2 = scale_to_second_moment(base, view.p2)
        lam3 = scale(lam2, sqrt_gain)
        if spec.scheme.uses_single_alpha:
            lam1 = scale(lam3, 1.0 / alphas[0])
        else:
            lam1 = scale(lam3, alphas[0] / alphas[1])
    except NonPositiveScaleError as e:
        raise LatticeRelationViolatedError(f"Cannot build lattice chain: {e}")

    scheme = spec.scheme
    if scheme is Scheme.THM2_CORNER_R2 or scheme is Scheme.THM3_CORNER_R2:
        out, msg, m = lam3, lam2, sqrt_gain
    elif scheme is Scheme.THM2_CORNER_R1:
        out, msg, m = lam3, lam1, alphas[0]
    elif scheme is Scheme.THM3_CORNER_R2_VARIANT2:
        out, msg, m = lam1, lam2, alphas[0] / alphas[1] * sqrt_gain
    elif scheme is Scheme.THM3_CORNER_R1_APPENDIX2:
        out, msg, m = lam1, lam1, 1.0
    else:
        out, msg, m = lam3, lam1, alphas[1] / alphas[0]

    power_budget_ok = lam1.sigma2 <= view.p1 * (1.0 + POWER_BUDGET_SLACK)
    if not power_budget_ok:
        logger.warning(
            "Derived Lambda1 exceeds the power budget of its user",
            extra={"sigma2_lambda1": lam1.sigma2, "power": view.p1, "scheme": scheme.value},
        )
    return LatticeChain(
        lam1=lam1,
        lam2=lam2,
        lam3=lam3,
        out=out,
        msg=msg,
        msg_scale=m,
        alphas=alphas,
        form=RECEIVER_FORMS[scheme],
        sqrt_gain=sqrt_gain,
        power_budget_ok=power_budget_ok,
    )


def _transmit_and_receive(
    scheme: Scheme,
    chain: LatticeChain,
    s1: np.ndarray,
    s2: np.ndarray,
    d1: np.ndarray,
    d2: np.ndarray,
    v: np.ndarray,
    z1: np.ndarray,
) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Encoders and literal receiver combination; returns (x1, x2, y1, yd1)."""
    l1, l2, l3 = chain.lam1, chain.lam2, chain.lam3
    g = chain.sqrt_gain

    if scheme.uses_single_alpha:
        (alpha,) = chain.alphas
        if scheme is Scheme.THM2_CORNER_R2:
            x1 = mod_lattice(l1, -s1 - d1)
            x2 = mod_lattice(l2, v - alpha * s2)
        else:
            x1 = mod_lattice(l1, v - s1)
            x2 = mod_lattice(l2, -alpha * s2 - d2)
        y1 = x1 + g * x2 + s1 + g * s2 + z1
        if scheme is Scheme.THM2_CORNER_R2:
            return x1, x2, y1, mod_lattice(l3, alpha * y1 + alpha * d1)
        return x1, x2, y1, mod_lattice(l3, alpha * y1 + g * d2)

    alpha1, alpha2 = chain.alphas
    r = alpha2 / alpha1
    s = alpha1 / alpha2
    if scheme is Scheme.THM3_CORNER_R2:
        x1 = mod_lattice(l1, -alpha1 * s1 + d1)
        x2 = mod_lattice(l2, v - alpha2 * s2 - d2)
    elif scheme is Scheme.THM3_CORNER_R2_VARIANT2:
        x1 = mod_lattice(l1, -alpha1 * s1 + d1)
        x2 = mod_lattice(l2, v - alpha2 * s2 + d2)
    else:
        x1 = mod_lattice(l1, v - alpha1 * s1 + d1)
        x2 = mod_lattice(l2, -alpha2 * s2 + d2)
    y1 = x1 + g * x2 + s1 + g * s2 + z1

    if scheme is Scheme.THM3_CORNER_R2:
        yd1 = mod_lattice(l3, alpha2 * y1 + g * d2 - r * d1)
    elif scheme is Scheme.THM3_CORNER_R1_APPENDIX2_VARIANT2:
        yd1 = mod_lattice(l3, alpha2 * y1 - g * d2 - r * d1)
    else:
        yd1 = mod_lattice(l1, alpha1 * y1 - s * g * d2 - d1)
    return x1, x2, y1, yd1


def _effective_noise(chain: LatticeChain, x1, x2, z1) -> np.ndarray:
    g = chain.sqrt_gain
    if chain.form is ReceiverForm.THM2:
        (alpha,) = chain.alphas
        return (alpha - 1.0) * g * x2 + alpha * z1
    alpha1, alpha2 = chain.alphas
    if chain.form is ReceiverForm.MOD_LAMBDA3:
        r = alpha2 / alpha1
        return g * (alpha2 - 1.0) * x2 - (1.0 - alpha1) * r * x1 + alpha2 * z1
    s = alpha1 / alpha2
    return (alpha1 - 1.0) * x1 - (1.0 - alpha2) * s * g * x2 + alpha1 * z1


def _block_rng(seed: int, block_index: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=seed).jumped(block_index))


def _digital_messages(chain: LatticeChain, rng: np.random.Generator, count: int, k: int):
    levels = 2**k
    index = rng.integers(0, levels, size=(count, chain.msg.n))
    leaders = mod_lattice(chain.msg, index * (chain.msg.scale_factor / levels))
    return index, leaders


def _decode_digital(chain: LatticeChain, yd1: np.ndarray, k: int) -> np.ndarray:
    levels = 2**k
    fine = scale(chain.out, 1.0 / levels)
    estimate = mod_lattice(chain.out, nearest_point(fine, yd1))
    return np.mod(np.round(estimate / (chain.out.scale_factor / levels)), levels).astype(np.int64)


def simulate_block(
    view: ChannelParams,
    spec: SchemeSpec,
    chain: LatticeChain,
    rng: np.random.Generator,
    count: int,
    nesting_exponent: Optional[int] = None,
) -> Tuple[TrialTrace, Optional[np.ndarray]]:
    """Run ``count`` trials; returns the trace and, in digital mode, the sent indices."""
    state = spec.state
    s1 = sample_state(state, chain.lam1, rng, count, view.q1)
    s2 = sample_state(state, chain.lam2, rng, count, view.q2)
    d1 = sample_dither(chain.lam1, rng, count)
    d2 = sample_dither(chain.lam2, rng, count)
    z1 = rng.normal(0.0, math.sqrt(view.n1), (count, chain.lam1.n))
    if nesting_exponent is None:
        index = None
        v = sample_dither(chain.msg, rng, count)
    else:
        index, v = _digital_messages(chain, rng, count, nesting_exponent)

    x1, x2, y1, yd1 = _transmit_and_receive(spec.scheme, chain, s1, s2, d1, d2, v, z1)
    zeff_pre = _effective_noise(chain, x1, x2, z1)
    trace = TrialTrace(
        s1=s1,
        s2=s2,
        d1=d1,
        d2=d2,
        v=v,
        x1=x1,
        x2=x2,
        z1=z1,
        y1=y1,
        yd1=yd1,
        zeff_pre=zeff_pre,
        zeff=mod_lattice(chain.out, zeff_pre),
        reduced_form=mod_lattice(chain.out, chain.msg_scale * v + zeff_pre),
    )
    return trace, index


def trace_trials(params: ChannelParams, spec: SchemeSpec, count: int = 16) -> TrialTrace:
    """Signals of the first ``count`` trials of a run, for inspection."""
    view = params.for_decoder(spec.decoder)
    chain = build_chain(view, spec)
    trace, _ = simulate_block(view, spec, chain, _block_rng(spec.seed, 0), count)
    return trace


def _run_block(
    view: ChannelParams,
    spec: SchemeSpec,
    chain: LatticeChain,
    block_index: int,
    count: int,
    nesting_exponent: Optional[int],
) -> BlockStats:
    rng = _block_rng(spec.seed, block_index)
    trace, index = simulate_block(view, spec, chain, rng, count, nesting_exponent)
    n = chain.lam1.n

    stats = BlockStats(
        count=count,
        x1_power=_Moments(),
        x2_power=_Moments(),
        zeff_pre=_Moments(),
        zeff_post=_Moments(),
        max_residual=float(trace.alignment_residual(chain.out).max()),
    )
    stats.x1_power.add(np.sum(trace.x1**2, axis=1) / n)
    stats.x2_power.add(np.sum(trace.x2**2, axis=1) / n)
    stats.zeff_pre.add(np.sum(trace.zeff_pre**2, axis=1) / n)
    stats.zeff_post.add(np.sum(trace.zeff**2, axis=1) / n)
    if index is not None:
        decoded = _decode_digital(chain, trace.yd1, nesting_exponent)
        stats.errors = int(np.count_nonzero(np.any(decoded != index, axis=1)))
    return stats


def _block_sizes(trials: int) -> List[int]:
    full, rest = divmod(trials, STREAM_BLOCK)
    return [STREAM_BLOCK] * full + ([rest] if rest else [])


def _jobs(block_count: int, chunk_size: int) -> List[range]:
    per_job = -(-chunk_size // STREAM_BLOCK)
    starts = range(0, block_count, per_job)
    return [range(start, min(start + per_job, block_count)) for start in starts]


def _mean_and_se(parts: Iterable[_Moments], count: int) -> Tuple[float, float]:
    parts = list(parts)
    mean = math.fsum(p.total for p in parts) / count
    second = math.fsum(p.total_sq for p in parts) / count
    variance = max(second - mean * mean, 0.0)
    return mean, math.sqrt(variance / max(count - 1, 1))


def _execute(
    params: ChannelParams,
    spec: SchemeSpec,
    workers: int,
    nesting_exponent: Optional[int],
) -> SimResult:
    view = params.for_decoder(spec.decoder)
    chain = build_chain(view, spec)
    sizes = _block_sizes(spec.trials)
    jobs = _jobs(len(sizes), spec.chunk_size)

    def job(blocks: range) -> List[BlockStats]:
        return [_run_block(view, spec, chain, b, sizes[b], nesting_exponent) for b in blocks]

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            per_job = list(pool.map(job, jobs))
    else:
        per_job = [job(blocks) for blocks in jobs]
    blocks = [stats for stats_list in per_job for stats in stats_list]

    trials = spec.trials
    x1_power, x1_se = _mean_and_se((c.x1_power for c in blocks), trials)
    x2_power, x2_se = _mean_and_se((c.x2_power for c in blocks), trials)
    pre, pre_se = _mean_and_se((c.zeff_pre for c in blocks), trials)
    post, post_se = _mean_and_se((c.zeff_post for c in blocks), trials)
    max_residual = max(c.max_residual for c in blocks)

    alphas = chain.alphas
    predicted = effective_noise_variance(
        chain.form,
        view.a12,
        chain.lam1.sigma2,
        chain.lam2.sigma2,
        view.n1,
        alphas[0],
        alphas[1] if len(alphas) > 1 else None,
    )

    ser = ser_se = None
    if nesting_exponent is not None:
        errors = sum(c.errors for c in blocks)
        ser = errors / trials
        ser_se = math.sqrt(ser * (1.0 - ser) / trials)

    combined_se = math.hypot(pre_se, post_se)
    result = SimResult(
        scheme=spec.scheme.value,
        decoder=spec.decoder,
        family=spec.family.value,
        dim=chain.lam1.n,
        trials=trials,
        seed=spec.seed,
        state_mode=spec.state.mode.value,
        alphas=alphas,
        x1_power=x1_power,
        x1_power_se=x1_se,
        x2_power=x2_power,
        x2_power_se=x2_se,
        sigma2_lambda1=chain.lam1.sigma2,
        sigma2_lambda2=chain.lam2.sigma2,
        zeff_pre_var=pre,
        zeff_pre_se=pre_se,
        zeff_post_var=post,
        zeff_post_se=post_se,
        predicted_pre_var=predicted,
        max_alignment_residual=max_residual,
        sigma2_out=chain.out.sigma2,
        shaping_loss_bits=shaping_loss_bits(chain.out),
        rate_lower_bound_bits=lattice_rate_lower_bound(chain.out.sigma2, pre, nsm(chain.out)),
        power_budget_ok=chain.power_budget_ok,
        post_within_pre=post <= pre + SE_FACTOR * combined_se,
        nesting_exponent=nesting_exponent,
        ser=ser,
        ser_se=ser_se,
    )
    logger.info(
        "Simulation finished",
        extra={
            "scheme": result.scheme,
            "decoder": result.decoder,
            "trials": trials,
            "blocks": len(sizes),
            "jobs": len(jobs),
            "workers": workers,
            "max_residual": max_residual,
        },
    )
    return result


def run_analog(params: ChannelParams, spec: SchemeSpec, workers: int = 1) -> SimResult:
    """Simulate a scheme with a continuous message uniform over its Voronoi cell.

    ``chunk_size`` and ``workers`` only change how stream blocks are
    scheduled; the result is bitwise the same for any value of either.

    Args:
        params: Channel parameters
        spec: Scheme configuration
        workers: Threads used for job execution (does not affect the result)

    Raises:
        LatticeRelationViolatedError: If the lattice chain cannot be built
        UnsupportedSchemeError: Unknown scheme tag
    """
    return _execute(params, spec, workers, None)


def run_digital(
    params: ChannelParams, spec: SchemeSpec, nesting_exponent: int, workers: int = 1
) -> SimResult:
    """Simulate with a nested-coset message: fine lattice = coarse / 2^k.

    A trial is in error when any coordinate of the decoded coset index
    differs from the sent one.

    Raises:
        UnsupportedFamilyError: Family other than integer-cubic
        ValueError: k < 1
    """
    if spec.family is not LatticeFamily.INTEGER_CUBIC:
        raise UnsupportedFamilyError(
            f"Digital mode needs the integer-cubic family, got {spec.family.value}"
        )
    if nesting_exponent < 1:
        raise ValueError(f"nesting exponent must be >= 1, got {nesting_exponent}")
    return _execute(params, spec, workers, nesting_exponent)


def measure_effective_noise(
    params: ChannelParams, spec: SchemeSpec, workers: int = 1
) -> EffectiveNoise:
    """Empirical effective-noise second moments before and after the modulo.

    Raises:
        ValueError: Fewer than 10^4 trials
    """
    if spec.trials < MIN_NOISE_TRIALS:
        raise ValueError(f"Effective-noise measurement needs >= {MIN_NOISE_TRIALS} trials")
    result = run_analog(params, spec, workers)
    return EffectiveNoise(
        pre_mod_var=result.zeff_pre_var,
        post_mod_var=result.zeff_post_var,
        predicted_pre_var=result.predicted_pre_var,
        pre_mod_se=result.zeff_pre_se,
        post_mod_se=result.zeff_post_se,
    )


def sweep_alpha(
    params: ChannelParams, spec: SchemeSpec, grid: Sequence[float], workers: int = 1
) -> SweepResult:
    """Empirical effective-noise variance over a coefficient grid.

    For Thm-3 schemes the grid sweeps alpha2 and alpha1 follows from the
    ratio identity (alpha2/alpha1)^2 = a12 P2 / P1, which keeps Lambda1 fixed.
    Every grid point reuses the same seed.

    Raises:
        InvalidGridError: Fewer than 11 points, or a point outside (0, 1.5]
    """
    points = [float(a) for a in grid]
    if len(points) < MIN_SWEEP_POINTS:
        raise InvalidGridError(f"Sweep needs >= {MIN_SWEEP_POINTS} points, got {len(points)}")
    if any(not 0.0 < a <= MAX_SWEEP_ALPHA for a in points):
        raise InvalidGridError(f"Sweep points must lie in (0, {MAX_SWEEP_ALPHA}]")

    view = params.for_decoder(spec.decoder)
    if spec.scheme.uses_single_alpha:
        closed_form = mmse_alpha_thm2(view).alpha
        candidates = [(a,) for a in points]
    else:
        closed_form = mmse_alphas_thm3(view).alpha2
        ratio = math.sqrt(view.a12 * view.p2 / view.p1)
        candidates = [(a / ratio, a) for a in points]

    variances: List[float] = []
    stderrs: List[float] = []
    for alphas in candidates:
        result = run_analog(params, replace(spec, alphas=alphas), workers)
        variances.append(result.zeff_pre_var)
        stderrs.append(result.zeff_pre_se)

    best = int(np.argmin(variances))
    logger.info(
        "Coefficient sweep finished",
        extra={"argmin": points[best], "closed_form": closed_form, "points": len(points)},
    )
    return SweepResult(
        grid=tuple(points),
        variances=tuple(variances),
        stderrs=tuple(stderrs),
        argmin=points[best],
        closed_form=closed_form,
    )


def result_record(params: ChannelParams, spec: SchemeSpec, result: SimResult) -> Dict[str, Any]:
    """Flat record of a SimResult plus the run's configuration hash."""
    record = result.to_dict()
    record["alphas"] = ";".join(format(a, ".17g") for a in result.alphas)
    record["state_value"] = spec.state.value
    record["config_hash"] = config_hash({"params": params.to_dict(), "spec": spec.to_dict()})
    return record
