"""
Run configuration for the command line.

Values come from a ``key = value`` config file and from flags; flags win.
The merged values are validated by :class:`RunConfig`.
"""

from __future__ import annotations

import logging
from pathlib import Path
from typing import Literal

from django.conf import settings
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from ensembles.classes import get_class
from ensembles.sampling import EnsembleSpec
from spectral.generating import SourceMatrix
from superrmt.errors import OutputError, UsageError
from superrmt.keyvalue import parse_key_values

logger = logging.getLogger(__name__)

SUBCOMMANDS = ("sample", "dos", "zgen", "volumes", "verify", "info")

# config-file spellings of the fields
KEY_ALIASES = {"class": "cls", "alpha": "alphas", "beta": "betas", "output": "output_dir", "out": "output_dir"}


def parse_complex(text) -> complex:
    """``re,im`` or a Python complex literal such as ``-1j``."""
    if isinstance(text, (int, float, complex)):
        return complex(text)
    text = str(text).strip()
    try:
        if "," in text:
            re_part, im_part = text.split(",")
            return complex(float(re_part), float(im_part))
        return complex(text.replace(" ", ""))
    except ValueError:
        raise UsageError(f"cannot read {text!r} as a complex number; use 're,im'") from None


def _complex_list(value):
    if value is None:
        return []
    if isinstance(value, str):
        value = [part for part in value.split(";") if part.strip()]
    return [parse_complex(v) for v in value]


class RunConfig(BaseModel):
    model_config = ConfigDict(extra="forbid", validate_default=True)

    subcommand: Literal["sample", "dos", "zgen", "volumes", "verify", "info"]
    cls: str = "A"
    N: int = Field(1, ge=1)
    v: float = Field(1.0, gt=0)
    n: int = Field(1, ge=1)
    alphas: list[complex] = Field(default_factory=list)
    betas: list[complex] = Field(default_factory=list)
    nsamples: int = Field(1000, ge=1)
    bins: int = Field(60, ge=1)
    seed: int | None = Field(None, ge=0)
    workers: int = Field(default_factory=lambda: settings.SUPERRMT_WORKERS, ge=1)
    output_dir: Path = Field(default_factory=lambda: Path(settings.SUPERRMT_OUTPUT_DIR))
    format: Literal["csv", "json"] = "csv"
    blocks: tuple[int, int] | None = None
    suite: str = "core"
    p: int = Field(2, ge=1)
    config_file: Path | None = None

    @field_validator("cls", mode="before")
    @classmethod
    def _known_class(cls, value):
        return get_class(value).label

    @field_validator("alphas", "betas", mode="before")
    @classmethod
    def _sources(cls, value):
        return _complex_list(value)

    @field_validator("blocks", mode="before")
    @classmethod
    def _blocks(cls, value):
        if isinstance(value, str):
            value = value.replace(",", " ").split()
        return value

    @model_validator(mode="after")
    def _consistent(self):
        if len(self.alphas) != len(self.betas):
            raise ValueError(f"{len(self.alphas)} alphas but {len(self.betas)} betas")
        if self.alphas:
            if "n" in self.model_fields_set and self.n != len(self.alphas):
                raise ValueError(f"n = {self.n} but {len(self.alphas)} source pairs were given")
            self.sources().validate(self.cls)
        if self.blocks is not None:
            self.ensemble()
        return self

    @classmethod
    def build(cls, subcommand: str, flags: dict) -> "RunConfig":
        """Merge the config file named by ``flags['config_file']`` under the flags."""
        values = {}
        config_file = flags.get("config_file")
        if config_file:
            values.update(read_config_file(config_file))
        values.update({k: v for k, v in flags.items() if v is not None and v != []})
        values["subcommand"] = subcommand
        try:
            return cls(**values)
        except ValidationError as exc:
            problems = "; ".join(
                f"{'.'.join(str(p) for p in err['loc']) or 'config'}: {err['msg']}" for err in exc.errors()
            )
            raise UsageError(f"invalid {subcommand} configuration: {problems}") from None

    def ensemble(self) -> EnsembleSpec:
        p, q = self.blocks if self.blocks else (None, None)
        return EnsembleSpec(self.cls, self.N, self.v, seed=self.seed, p=p, q=q)

    def sources(self) -> SourceMatrix:
        return SourceMatrix(self.alphas, self.betas)

    def snapshot(self) -> dict:
        """JSON-ready copy of every field, complex numbers as [re, im]."""
        out = self.model_dump(mode="json", exclude={"alphas", "betas"})
        out["alphas"] = [[a.real, a.imag] for a in self.alphas]
        out["betas"] = [[b.real, b.imag] for b in self.betas]
        return out


def read_config_file(path) -> dict:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except FileNotFoundError:
        raise UsageError(f"config file {path} does not exist") from None
    except OSError as exc:
        raise OutputError(f"could not read config file: {exc.strerror or exc}", path) from exc
    values = {}
    for key, value in parse_key_values(text, str(path)).items():
        values[KEY_ALIASES.get(key, key)] = value
    logger.debug("config file %s: %s", path, sorted(values))
    return values
