import numpy as np
from tqdm import tqdm

from ensembles.sampling import export_matrices_csv, sample_h
from workbench.commands import Outcome, WorkbenchCommand
from workbench.emit import emit_results, write_meta


class Command(WorkbenchCommand):
    help = "Draw Hamiltonians from one of the ten ensembles and write them out."
    subcommand = "sample"

    def add_run_arguments(self, parser):
        self.add_ensemble_arguments(parser)

    def perform(self, config):
        spec = config.ensemble()
        rng = np.random.default_rng(config.seed)
        draws = tqdm(range(config.nsamples), desc=str(spec), unit="H", disable=not self.progress, leave=False)
        matrices = [sample_h(spec, rng) for _ in draws]
        path = self.output_path(config, f"sample_{spec.cls.label}_N{spec.N}_seed{config.seed}")
        snapshot = config.snapshot()
        if config.format == "csv":
            export_matrices_csv(matrices, path)
            files = [path, write_meta(path, snapshot, format="csv", records=len(matrices))]
        else:
            records = [{"sample": k, "re": m.real.tolist(), "im": m.imag.tolist()} for k, m in enumerate(matrices)]
            files = emit_results(records, "json", path, fields=("sample", "re", "im"), snapshot=snapshot)
        self.stdout.write(self.style.SUCCESS(
            f"{len(matrices)} matrices of {spec} ({spec.dimension}x{spec.dimension}), seed {config.seed}"))
        return Outcome(files=files)
