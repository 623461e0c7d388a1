"""
Run configuration: environment defaults and JSON config files
"""
import os
import json
from pathlib import Path
from typing import Any, Dict, Literal, Optional

from dotenv import load_dotenv
from pydantic import BaseModel, ConfigDict, Field, ValidationError

from boundary_ising.errors import ConfigError

# Load environment variables
load_dotenv()

DEFAULT_THREADS = max(1, int(os.getenv("ISING_THREADS", "1")))
DEFAULT_SEED = int(os.getenv("ISING_SEED", "20240601"))


class RunConfig(BaseModel):
    """Validated contents of a `--config` file"""
    model_config = ConfigDict(extra="forbid")

    command: Optional[str] = Field(None, description="Subcommand the parameters belong to")
    params: Dict[str, Any] = Field(default_factory=dict, description="Flag name to value")
    output: Optional[str] = Field(None, description="Write results here instead of stdout")
    format: Literal["json", "csv"] = Field("json", description="Result encoding")
    threads: int = Field(DEFAULT_THREADS, ge=1, le=256, description="Worker budget")
    seed: int = Field(DEFAULT_SEED, ge=0, description="Seed for randomised draws")


def load_run_config(path: str) -> RunConfig:
    """
    Read and validate a JSON run configuration

    Raises:
        ConfigError: file missing, not JSON, or failing validation
    """
    config_path = Path(path)
    try:
        raw = json.loads(config_path.read_text())
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {config_path}", {"path": str(config_path)})
    except json.JSONDecodeError as e:
        raise ConfigError(f"config file is not valid JSON: {e}", {"path": str(config_path)})

    try:
        return RunConfig.model_validate(raw)
    except ValidationError as e:
        raise ConfigError(
            f"invalid run configuration: {e.error_count()} error(s)",
            {"path": str(config_path), "errors": json.loads(e.json())},
        )
