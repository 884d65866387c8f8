import logging

from spectral.generating import z_gen_mc, z_gen_quadrature
from superrmt.errors import UnsupportedClassError, UsageError
from workbench.commands import Outcome, WorkbenchCommand
from workbench.emit import emit_results

logger = logging.getLogger(__name__)

FIELDS = ("method", "re", "im", "stderr", "nsamples")


class Command(WorkbenchCommand):
    help = "Ratio-of-determinants generating function Z by quadrature (N = 1) and Monte Carlo."
    subcommand = "zgen"

    def add_run_arguments(self, parser):
        self.add_ensemble_arguments(parser)
        self.add_source_arguments(parser)

    def perform(self, config):
        spec, src = config.ensemble(), config.sources()
        if not src.alphas:
            raise UsageError("zgen needs at least one --alpha/--beta pair")
        records = []
        if spec.N == 1:
            try:
                z = z_gen_quadrature(spec, src)
            except UnsupportedClassError as exc:
                logger.info("no quadrature: %s", exc)
            else:
                records.append({"method": "quadrature", "re": z.real, "im": z.imag, "stderr": 0.0, "nsamples": 0})
        z, err = z_gen_mc(spec, src, config.nsamples, config.seed, workers=config.workers, progress=self.progress)
        records.append({"method": "monte_carlo", "re": z.real, "im": z.imag, "stderr": err,
                        "nsamples": config.nsamples})
        for row in records:
            self.stdout.write(self.style.SUCCESS(
                f"{row['method']:<12} Z = {complex(row['re'], row['im']):.10g} +- {row['stderr']:.3g}"))
        path = self.output_path(config, f"zgen_{spec.cls.label}_N{spec.N}_seed{config.seed}")
        return Outcome(files=emit_results(records, config.format, path, fields=FIELDS, snapshot=config.snapshot()))
