import math

from django.conf import settings

from berezin.gl11 import gl11_integral
from berezin.supersphere import supersphere_volume
from workbench.commands import Outcome, WorkbenchCommand
from workbench.emit import emit_results

REFERENCE = {1: 0.0, 2: 4 * math.pi, 3: 2 * math.pi**2}
FIELDS = ("integral", "p", "re", "im", "reference")


def _constant(g):
    return 1.0


class Command(WorkbenchCommand):
    help = "Berezin volumes of the superspheres S^{p|2} and the Gl(1|1) Haar integral of 1."
    subcommand = "volumes"
    seeded = False

    def add_run_arguments(self, parser):
        parser.add_argument("--p", type=int)
        parser.add_argument("--single-chart", action="store_true", help="one chart plus its anomaly (p >= 3)")

    def handle(self, *args, **options):
        self.single_chart = options.get("single_chart", False)
        return super().handle(*args, **options)

    def perform(self, config):
        p = config.p
        vol = complex(supersphere_volume(p, single_chart=self.single_chart, rtol=settings.SUPERRMT_QUAD_RTOL))
        haar = complex(gl11_integral(_constant).value)
        records = [
            {"integral": "supersphere", "p": p, "re": vol.real, "im": vol.imag, "reference": REFERENCE.get(p)},
            {"integral": "gl11_haar", "p": None, "re": haar.real, "im": haar.imag, "reference": 1.0},
        ]
        ref = f" (expected {REFERENCE[p]:.12g})" if p in REFERENCE else ""
        self.stdout.write(self.style.SUCCESS(f"vol(S^{{{p}|2}}) = {vol.real:.12g}{ref}"))
        self.stdout.write(self.style.SUCCESS(f"Gl(1|1) Haar integral of 1 = {haar.real:.12g}"))
        path = self.output_path(config, f"volumes_p{p}")
        return Outcome(files=emit_results(records, config.format, path, fields=FIELDS, snapshot=config.snapshot()))
