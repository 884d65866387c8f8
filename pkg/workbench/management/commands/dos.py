from spectral.density import dos_estimate
from workbench.commands import Outcome, WorkbenchCommand
from workbench.emit import emit_results, write_plot_script


def semicircle_expression(N: int, v: float) -> str:
    return f"(abs(x) <= {2 * v!r} ? {N}/(pi*{v!r})*sqrt(1 - (x/{2 * v!r})**2) : 0)"


class Command(WorkbenchCommand):
    help = "Monte Carlo level density: histogram files and a gnuplot script."
    subcommand = "dos"

    def add_run_arguments(self, parser):
        self.add_ensemble_arguments(parser)
        parser.add_argument("--bins", type=int)

    def perform(self, config):
        spec = config.ensemble()
        hist = dos_estimate(spec, config.nsamples, config.bins, config.seed,
                            workers=config.workers, progress=self.progress)
        stem = f"dos_{spec.cls.label}_N{spec.N}_seed{config.seed}"
        snapshot = config.snapshot()
        csv_path = self.output_path(config, stem, "csv")
        files = emit_results(hist, "csv", csv_path, snapshot=snapshot)
        if config.format == "json":
            files += emit_results(hist, "json", self.output_path(config, stem, "json"), snapshot=snapshot)
        reference = semicircle_expression(spec.N, spec.v) if spec.cls.label == "A" else None
        files.append(write_plot_script(csv_path, title=f"{spec}, {hist.nsamples} samples", reference=reference))
        self.stdout.write(self.style.SUCCESS(
            f"{spec}: {config.bins} bins, {hist.total():.6g} levels per matrix in range, seed {config.seed}"))
        return Outcome(files=files)
