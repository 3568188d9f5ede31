from pathlib import Path
from typing import List, Literal, Optional, Union

import yaml
from pydantic import BaseModel, ConfigDict, Field, PositiveFloat, PositiveInt, ValidationError

from lattice import DEFAULT_MC_SAMPLES, LatticeFamily
from model import UNBOUNDED, ChannelParams, build_params
from simulate import (
    DEFAULT_CHUNK_SIZE,
    DEFAULT_TRIALS,
    Scheme,
    SchemeSpec,
    StateMode,
    StateSpec,
    default_state,
)
from utils import safe_open

# Configuration loader for asdgic-lattice
# Engine defaults live in config/engine.yaml; per-run channel scenarios are
# separate YAML files (see config/scenarios/).

DEFAULT_ENGINE_CONFIG = Path(__file__).resolve().parent.parent / "config" / "engine.yaml"

StateValue = Union[PositiveFloat, Literal["unbounded"]]


def _load_yaml(config_path: Path, what: str) -> dict:
    try:
        with safe_open(config_path, allowed_base=False) as f:
            data = yaml.safe_load(f)
    except FileNotFoundError:
        raise FileNotFoundError(
            f"{what} not found: {config_path}\n"
            f"Please ensure {config_path} exists and contains valid configuration."
        )
    except yaml.YAMLError as e:
        raise yaml.YAMLError(
            f"Invalid YAML in {config_path}: {e}\n" f"Please check the file for syntax errors."
        )
    return data or {}


class EnvelopeConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    grid_density: PositiveInt = 256
    boost_cap: float = Field(default=100.0, gt=1.0)


class SimulationConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    chunk_size: PositiveInt = DEFAULT_CHUNK_SIZE
    workers: PositiveInt = 1
    default_trials: PositiveInt = DEFAULT_TRIALS
    default_seed: int = Field(default=0, ge=0)


class LatticeConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    mc_samples: int = Field(default=DEFAULT_MC_SAMPLES, ge=10_000)
    mc_seed: int = Field(default=0, ge=0)


class LoggingConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    level: str = "INFO"
    json_format: bool = False


class EngineConfig(BaseModel):
    """Engine defaults shared by every subcommand."""

    model_config = ConfigDict(extra="forbid")

    version: str = "1.0"
    envelope: EnvelopeConfig = Field(default_factory=EnvelopeConfig)
    simulation: SimulationConfig = Field(default_factory=SimulationConfig)
    lattice: LatticeConfig = Field(default_factory=LatticeConfig)
    logging: LoggingConfig = Field(default_factory=LoggingConfig)

    @classmethod
    def load(cls, config_path: Path = DEFAULT_ENGINE_CONFIG) -> "EngineConfig":
        """Load engine configuration from engine.yaml

        Raises:
            FileNotFoundError: If config file doesn't exist
            yaml.YAMLError: If YAML is invalid
            ValidationError: If config doesn't match schema
        """
        data = _load_yaml(Path(config_path), "Engine configuration")
        try:
            return cls(**data)
        except ValidationError:
            # Let ValidationError propagate naturally; pydantic's message is descriptive
            raise


class LatticeSettings(BaseModel):
    model_config = ConfigDict(extra="forbid")

    family: LatticeFamily = LatticeFamily.INTEGER_CUBIC
    dim: PositiveInt = 1


class SimulationSettings(BaseModel):
    model_config = ConfigDict(extra="forbid")

    scheme: Scheme = Scheme.THM2_CORNER_R2
    decoder: Literal[1, 2] = 1
    trials: Optional[PositiveInt] = None
    seed: Optional[int] = Field(default=None, ge=0)
    state_mode: Optional[StateMode] = None
    state_value: Optional[PositiveFloat] = None
    alphas: Optional[List[PositiveFloat]] = None
    nesting_exponent: Optional[PositiveInt] = None


class Scenario(BaseModel):
    """One channel scenario: parameters plus optional lattice/simulation settings.

    Key names are exactly p1, p2, n1, n2, a12, a21, q1, q2; unknown keys are
    rejected. State variances are numbers or the string "unbounded".
    """

    model_config = ConfigDict(extra="forbid")

    p1: float
    p2: float
    n1: float
    n2: float
    a12: float
    a21: float
    q1: StateValue = UNBOUNDED.value
    q2: StateValue = UNBOUNDED.value
    lattice: Optional[LatticeSettings] = None
    simulation: Optional[SimulationSettings] = None
    envelope: Optional[EnvelopeConfig] = None
    format: Literal["csv", "json"] = "csv"

    @classmethod
    def load(cls, config_path: Path) -> "Scenario":
        """Load a scenario file

        Raises:
            FileNotFoundError: If the file doesn't exist
            yaml.YAMLError: If YAML is invalid
            ValidationError: If the scenario doesn't match the schema
        """
        data = _load_yaml(Path(config_path), "Scenario file")
        return cls(**data)

    def dump(self) -> str:
        """YAML text that parses back into an equal Scenario."""
        return yaml.safe_dump(self.model_dump(mode="json", exclude_none=True), sort_keys=False)

    def to_params(self, allow_zero_noise: bool = False) -> ChannelParams:
        return build_params(
            self.p1,
            self.p2,
            self.n1,
            self.n2,
            self.a12,
            self.a21,
            self.q1,
            self.q2,
            allow_zero_noise=allow_zero_noise,
        )

    def scheme_spec(self, engine: EngineConfig, **overrides) -> SchemeSpec:
        """Combine scenario settings, engine defaults and explicit overrides.

        ``overrides`` uses SchemeSpec field names plus ``state_mode`` and
        ``state_value``; None values are ignored.
        """
        sim = self.simulation or SimulationSettings()
        lat = self.lattice or LatticeSettings()
        overrides = {k: v for k, v in overrides.items() if v is not None}

        state_mode = overrides.pop("state_mode", sim.state_mode)
        state_value = overrides.pop("state_value", sim.state_value)
        if state_mode is None:
            fallback = default_state(self.q1, self.q2)
            state_mode = fallback.mode
            if state_value is None:
                state_value = fallback.value

        fields = {
            "scheme": sim.scheme,
            "decoder": sim.decoder,
            "family": lat.family,
            "dim": lat.dim,
            "alphas": tuple(sim.alphas) if sim.alphas else None,
            "trials": sim.trials or engine.simulation.default_trials,
            "seed": sim.seed if sim.seed is not None else engine.simulation.default_seed,
            "chunk_size": engine.simulation.chunk_size,
            "lattice_samples": engine.lattice.mc_samples,
            "lattice_seed": engine.lattice.mc_seed,
        }
        fields.update(overrides)
        return SchemeSpec(state=StateSpec(StateMode(state_mode), state_value), **fields)


# Usage example:
# engine = EngineConfig.load()
# scenario = Scenario.load(Path("config/scenarios/symmetric_unit.yaml"))
# params = scenario.to_params()
