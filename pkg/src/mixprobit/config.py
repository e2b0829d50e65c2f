"""Run configuration: defaults, JSON round-trip, validation."""

import json
from dataclasses import asdict, dataclass, fields, replace

from .errors import UsageError
from .model import PriorConfig

__all__ = ["RunConfig"]


@dataclass
class RunConfig:
    """Every knob of a fitting or study run.

    ``c_delta`` of None means "use the sample size"; ``model_prior`` of
    None means uniform over 1..max_components.
    """

    seed: int | None = None
    max_components: int = 3
    model_prior: list | None = None
    c_alpha: float = 1e4
    c_tau: float = 1e3
    c_delta: float | None = None
    epsilon: float = 0.05
    basis_rank: int = 25
    pilot_burnin: int = 1000
    pilot_length: int = 2000
    warmup: int = 5000
    sampling: int = 5000
    thin: int = 1
    level: float = 0.90
    function: str = "a"
    n: int = 1000
    replications: int = 10
    jobs: int = 1
    b_negated_exponents: bool = False

    def validate(self):
        if not 0.0 < self.level < 1.0:
            raise UsageError("level must lie in (0, 1)")
        if self.max_components < 1:
            raise UsageError("max-components must be at least 1")
        if not 0.0 < self.epsilon <= 1.0:
            raise UsageError("epsilon must lie in (0, 1]")
        for name in ("basis_rank", "sampling", "thin", "n",
                     "replications", "jobs"):
            if int(getattr(self, name)) < 1:
                raise UsageError(f"{name} must be at least 1")
        for name in ("pilot_burnin", "warmup"):
            if int(getattr(self, name)) < 0:
                raise UsageError(f"{name} must not be negative")
        if int(self.pilot_length) < 2:
            raise UsageError("pilot_length must be at least 2")
        return self

    def prior(self):
        mp = tuple(self.model_prior) if self.model_prior is not None else None
        return PriorConfig(c_alpha=self.c_alpha, c_tau=self.c_tau,
                           c_delta=self.c_delta,
                           max_components=self.max_components,
                           model_prior=mp)

    def replace(self, **kw):
        return replace(self, **kw)

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, data):
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise UsageError(f"unknown config keys: {sorted(unknown)}")
        return cls(**data).validate()

    @classmethod
    def from_file(cls, path):
        try:
            with open(path) as fh:
                data = json.load(fh)
        except OSError as exc:
            raise UsageError(f"cannot read config file {path}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise UsageError(f"config file {path} is not valid JSON: {exc}") from exc
        if not isinstance(data, dict):
            raise UsageError("config file must hold a JSON object")
        return cls.from_dict(data)

    def to_file(self, path):
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")
