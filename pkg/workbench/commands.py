"""
Shared plumbing for the workbench management commands.

Every command builds a :class:`RunConfig`, records the run in the ledger,
does its work in :meth:`WorkbenchCommand.perform` and turns workbench errors
into ``CommandError`` carrying the exit code.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path

from django.core.management.base import BaseCommand, CommandError
from django.db import DatabaseError

from ensembles.montecarlo import resolve_seed
from superrmt.errors import WorkbenchError
from .config import RunConfig
from .models import RunRecord

logger = logging.getLogger(__name__)

FLAG_KEYS = ("cls", "N", "v", "n", "alphas", "betas", "nsamples", "bins", "seed", "workers",
             "output_dir", "format", "blocks", "suite", "p", "config_file")


@dataclass
class Outcome:
    status: str = "Passed"
    exit_code: int = 0
    files: list[Path] = field(default_factory=list)
    message: str = ""


def start_run(config: RunConfig) -> RunRecord | None:
    try:
        return RunRecord.objects.create(subcommand=config.subcommand, config=config.snapshot(), seed=config.seed)
    except DatabaseError as exc:
        logger.warning("run ledger unavailable, %s run not recorded: %s", config.subcommand, exc)
        return None


def finish_run(record: RunRecord | None, status: str, exit_code: int, files=()) -> None:
    if record is None:
        return
    record.status = status
    record.exit_code = exit_code
    record.output_path = str(files[0]) if files else ""
    try:
        record.save(update_fields=["status", "exit_code", "output_path"])
    except DatabaseError as exc:
        logger.warning("could not update %s: %s", record.run_id, exc)


class WorkbenchCommand(BaseCommand):
    subcommand: str = ""
    seeded = True

    def add_arguments(self, parser):
        parser.add_argument("--config", dest="config_file", help="key = value config file; flags win")
        parser.add_argument("--seed", type=int)
        parser.add_argument("--workers", type=int)
        parser.add_argument("--output-dir", dest="output_dir")
        parser.add_argument("--format", choices=("csv", "json"))
        parser.add_argument("--progress", action="store_true", help="show progress bars")
        self.add_run_arguments(parser)

    def add_run_arguments(self, parser):
        pass

    def add_ensemble_arguments(self, parser):
        parser.add_argument("--class", dest="cls", help="symmetry class label, e.g. A or C")
        parser.add_argument("--N", type=int)
        parser.add_argument("--v", type=float)
        parser.add_argument("--nsamples", type=int)
        parser.add_argument("--blocks", type=int, nargs=2, metavar=("P", "Q"),
                            help="chiral block sizes; the chiral classes need P = Q")

    def add_source_arguments(self, parser):
        parser.add_argument("--alpha", dest="alphas", action="append", help="re,im; repeat for n > 1")
        parser.add_argument("--beta", dest="betas", action="append", help="re,im; repeat for n > 1")
        parser.add_argument("--n", type=int)

    def default_seed(self) -> int:
        return resolve_seed(None)

    def configure(self, options) -> RunConfig:
        flags = {key: options.get(key) for key in FLAG_KEYS}
        config = RunConfig.build(self.subcommand, flags)
        if self.seeded and config.seed is None:
            config = config.model_copy(update={"seed": self.default_seed()})
        return config

    def output_path(self, config: RunConfig, stem: str, suffix: str | None = None) -> Path:
        return Path(config.output_dir) / f"{stem}.{suffix or config.format}"

    def perform(self, config: RunConfig) -> Outcome:
        raise NotImplementedError

    def handle(self, *args, **options):
        self.progress = options.get("progress", False)
        try:
            config = self.configure(options)
        except WorkbenchError as exc:
            raise CommandError(str(exc), returncode=exc.exit_code) from exc
        record = start_run(config)
        try:
            outcome = self.perform(config)
        except WorkbenchError as exc:
            finish_run(record, "Error", exc.exit_code)
            raise CommandError(str(exc), returncode=exc.exit_code) from exc
        finish_run(record, outcome.status, outcome.exit_code, outcome.files)
        for path in outcome.files:
            self.stdout.write(f"  {path}")
        if outcome.exit_code:
            raise CommandError(outcome.message or f"{self.subcommand} failed", returncode=outcome.exit_code)
