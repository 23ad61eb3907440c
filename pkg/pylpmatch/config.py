import os
from dataclasses import dataclass, asdict
from typing import Optional, Dict, Any

from dotenv import load_dotenv, set_key

from .errors import InvalidArgumentError

ENV_PREFIX = "PYLPMATCH_"
OUTPUT_FORMATS = ("csv", "json")


@dataclass
class Settings:
    """
    Runtime settings shared by the facade and the CLI.

    :param workers: Number of threads used for level parallelism.
    :param block_len: Optional override of the correlation block length.
    :param seed: Default seed for randomized algorithms and generators.
    :param output_format: Default output format for distance files.
    """

    workers: int = 1
    block_len: Optional[int] = None
    seed: int = 0
    output_format: str = "json"

    def __post_init__(self):
        if self.workers < 1:
            raise InvalidArgumentError(f"workers must be >= 1, got {self.workers}")
        if self.block_len is not None and self.block_len < 2:
            raise InvalidArgumentError(
                f"block_len must be >= 2, got {self.block_len}"
            )
        if self.output_format not in OUTPUT_FORMATS:
            raise InvalidArgumentError(
                f"output_format must be one of {OUTPUT_FORMATS}, got {self.output_format!r}"
            )


def _env_int(name: str) -> Optional[int]:
    raw = os.getenv(ENV_PREFIX + name)
    if raw is None or raw.strip() == "":
        return None
    try:
        return int(raw)
    except ValueError:
        raise InvalidArgumentError(f"{ENV_PREFIX}{name} must be an integer, got {raw!r}")


def load_settings(env_path: str = ".env", **overrides: Any) -> Settings:
    """
    Build settings from defaults, the .env file, the process environment and
    explicit overrides (highest precedence). Overrides set to None are ignored.
    """
    if os.path.exists(env_path):
        load_dotenv(env_path)

    values: Dict[str, Any] = {}
    threads = _env_int("THREADS")
    if threads is not None:
        values["workers"] = threads
    block_len = _env_int("BLOCK_LEN")
    if block_len is not None:
        values["block_len"] = block_len
    seed = _env_int("SEED")
    if seed is not None:
        values["seed"] = seed
    output_format = os.getenv(ENV_PREFIX + "FORMAT")
    if output_format:
        values["output_format"] = output_format.strip().lower()

    values.update({k: v for k, v in overrides.items() if v is not None})
    return Settings(**values)


def save_settings(settings: Settings, env_path: str = ".env") -> None:
    """Write settings back to the .env file so later runs pick them up."""
    if not os.path.exists(env_path):
        open(env_path, "a").close()
    keys = {
        "workers": "THREADS",
        "block_len": "BLOCK_LEN",
        "seed": "SEED",
        "output_format": "FORMAT",
    }
    for field_name, value in asdict(settings).items():
        if value is None:
            continue
        set_key(env_path, ENV_PREFIX + keys[field_name], str(value))
