import json
from pathlib import Path

from superrmt.errors import OutputError
from verify.reports import report_schema
from verify.suite import DEFAULT_SEED, run_suite, suite_passed
from workbench.commands import Outcome, WorkbenchCommand
from workbench.emit import emit_results


class Command(WorkbenchCommand):
    help = "Run a verification suite (core or full) and write one report per identity."
    subcommand = "verify"

    def add_run_arguments(self, parser):
        parser.add_argument("--suite", help="core (default) or full")
        parser.add_argument("--schema", help="also write the JSON schema of the reports to this path")

    def default_seed(self):
        return DEFAULT_SEED

    def handle(self, *args, **options):
        self.schema_path = options.get("schema")
        return super().handle(*args, **options)

    def perform(self, config):
        reports = run_suite(config.suite, seed=config.seed, workers=config.workers, progress=self.progress)
        for report in reports:
            style = self.style.SUCCESS if report.passed else self.style.ERROR
            self.stdout.write(style(report.summary_line()))
        path = self.output_path(config, f"verify_{config.suite}_seed{config.seed}")
        files = emit_results(reports, config.format, path, snapshot=config.snapshot())
        if self.schema_path:
            files.append(write_schema(self.schema_path))
        failed = sum(not r.passed for r in reports)
        if suite_passed(reports):
            self.stdout.write(self.style.SUCCESS(f"suite {config.suite}: all {len(reports)} checks passed"))
            return Outcome(files=files)
        message = f"suite {config.suite}: {failed} of {len(reports)} checks failed"
        return Outcome(status="Failed", exit_code=2, files=files, message=message)


def write_schema(path) -> Path:
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(report_schema(), indent=2) + "\n", encoding="utf-8")
    except OSError as exc:
        raise OutputError(f"could not write schema: {exc.strerror or exc}", path) from exc
    return path
