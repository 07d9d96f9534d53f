import json
from pathlib import Path
from typing import Any, Dict, Optional

from pydantic import Field, ValidationError

from app.core.config import settings
from app.core.errors import ConfigError
from app.trainer.trainer_validator import FitConfig


class RunConfigFile(FitConfig):
    """
    JSON run configuration: every FitConfig key (with "lambda" accepted for
    l1_strength) plus the data and output locations. Unknown keys are rejected.
    """

    input: Optional[str] = None
    truth: Optional[str] = None
    out: Optional[str] = None
    n: Optional[int] = Field(None, ge=1)
    directed: bool = False
    train_fraction: float = Field(settings.train_fraction, gt=0, le=1)

    num_cliques: int = Field(3, ge=1)
    clique_size: int = Field(10, ge=1)
    flip_rate: float = Field(0.05, ge=0, le=1)

    def fit_config(self, overrides: Optional[Dict[str, Any]] = None) -> FitConfig:
        """FitConfig from the keys set in the file, then `overrides` on top."""
        values = {
            k: v
            for k, v in self.model_dump(exclude_unset=True).items()
            if k in FitConfig.model_fields
        }
        values.update(overrides or {})
        try:
            return FitConfig(**values)
        except ValidationError as e:
            raise ConfigError(_describe(e))


def _describe(e: ValidationError) -> str:
    return "; ".join(
        f"{'.'.join(str(p) for p in err['loc']) or '<root>'}: {err['msg']}"
        for err in e.errors()
    )


def load_run_config(path: Optional[str]) -> RunConfigFile:
    if path is None:
        return RunConfigFile()
    try:
        raw = json.loads(Path(path).read_text())
    except OSError as e:
        raise ConfigError(f"cannot read config file {path}: {e}")
    except json.JSONDecodeError as e:
        raise ConfigError(f"{path}: invalid JSON at line {e.lineno}: {e.msg}")
    if not isinstance(raw, dict):
        raise ConfigError(f"{path}: top level must be an object")
    try:
        return RunConfigFile.model_validate(raw)
    except ValidationError as e:
        raise ConfigError(f"{path}: {_describe(e)}")
