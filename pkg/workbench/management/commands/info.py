import json

from ensembles.classes import CLASS_LABELS, get_class
from verify.saddle import saddle_info
from workbench.commands import Outcome, WorkbenchCommand
from workbench.emit import emit_results


def class_record(label: str) -> dict:
    sym = get_class(label)
    saddle = saddle_info(sym)
    return {
        **sym.rss_entry(),
        "cartan": sym.cartan_label,
        "noncompact": sym.noncompact,
        "compact": sym.compact,
        "c_exponent": str(sym.c_exponent),
        "saddle_count": sym.saddle_count,
        "coset": saddle.coset,
        "stability_group": saddle.stability_group,
        "M_B": saddle.boson_base,
        "M_F": saddle.fermion_base,
    }


class Command(WorkbenchCommand):
    help = "Dump class metadata and the random-matrix to symmetric-superspace correspondence."
    subcommand = "info"
    seeded = False

    def add_run_arguments(self, parser):
        parser.add_argument("--class", dest="cls", help="one class; all ten when omitted")

    def handle(self, *args, **options):
        self.single = options.get("cls")
        return super().handle(*args, **options)

    def perform(self, config):
        labels = [config.cls] if self.single else list(CLASS_LABELS)
        records = [class_record(label) for label in labels]
        self.stdout.write(json.dumps(records, indent=2, ensure_ascii=False))
        stem = f"info_{config.cls}" if self.single else "info"
        path = self.output_path(config, stem)
        return Outcome(files=emit_results(records, config.format, path, snapshot=config.snapshot()))
