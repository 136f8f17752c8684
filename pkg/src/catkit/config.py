"""Run configuration: flat ``key = value`` files with ``#`` comments."""

from __future__ import annotations

from dataclasses import dataclass, fields, replace

from .catability import OptConfig
from .decoherence import WignerGrid
from .errors import CatkitError
from .fock import FockSpace


class ConfigError(CatkitError, ValueError):
    def __init__(self, key: str, message: str):
        super().__init__(f"config key '{key}': {message}")
        self.key = key


@dataclass(frozen=True)
class RunConfig:
    dim: int = 64
    tail_tol: float = 1e-10
    herm_tol: float = 1e-10
    gamma_min: float = 1e-3
    gamma_max: float = 1e3
    gamma_points: int = 25
    gs_tol: float = 1e-4
    starts: int = 8
    r_max: float = 2.0
    seed: int = 42
    max_iters: int = 4000
    beta_max: float = 4.0
    h: float = 0.1
    out: str | None = None
    json: str | None = None

    def validate(self) -> RunConfig:
        for f in fields(self):
            val = getattr(self, f.name)
            if f.name in ("out", "json"):
                continue
            if f.name == "seed":
                if val < 0:
                    raise ConfigError("seed", f"must be >= 0, got {val}")
            elif not val > 0:
                raise ConfigError(f.name, f"must be positive, got {val}")
        if self.gamma_max <= self.gamma_min:
            raise ConfigError("gamma_max", "must exceed gamma_min")
        if self.gamma_points < 2:
            raise ConfigError("gamma_points", "must be >= 2")
        if self.dim < 4:
            raise ConfigError("dim", f"must be >= 4, got {self.dim}")
        return self

    def space(self) -> FockSpace:
        return FockSpace(self.dim, self.herm_tol, self.tail_tol)

    def opt(self) -> OptConfig:
        return OptConfig(gamma_min=self.gamma_min, gamma_max=self.gamma_max,
                         gamma_points=self.gamma_points, gs_tol=self.gs_tol, starts=self.starts,
                         r_max=self.r_max, seed=self.seed, max_iters=self.max_iters)

    def wigner(self) -> WignerGrid:
        return WignerGrid(self.beta_max, self.h)


FIELD_TYPES = {f.name: f.type for f in fields(RunConfig)}


def _convert(key: str, raw: str):
    kind = FIELD_TYPES[key]
    if kind == "str | None":
        return raw
    try:
        if kind == "int":
            return int(raw)
        return float(raw)
    except ValueError:
        raise ConfigError(key, f"cannot parse {raw!r} as {kind}") from None


def parse_config_text(text: str, source: str = "<config>") -> dict:
    values = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(line, f"{source}:{lineno}: expected 'key = value'")
        key, raw = (s.strip() for s in line.split("=", 1))
        if key not in FIELD_TYPES:
            raise ConfigError(key, f"{source}:{lineno}: unknown key")
        values[key] = _convert(key, raw)
    return values


def load_config(path: str | None = None, overrides: dict | None = None) -> RunConfig:
    """Defaults, then the file, then explicit overrides; validated."""
    values = {}
    if path is not None:
        with open(path, encoding="utf-8") as fh:
            values.update(parse_config_text(fh.read(), path))
    values.update({k: v for k, v in (overrides or {}).items() if v is not None})
    return replace(RunConfig(), **values).validate()
