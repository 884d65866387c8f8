import csv
import json
import tempfile
from io import StringIO
from pathlib import Path
from unittest import mock

import numpy as np
from django.core.management import call_command
from django.core.management.base import CommandError
from django.test import TestCase

from spectral.density import SpectralHistogram
from spectral.generating import SourceMatrix
from superrmt.errors import OutputError, UsageError
from verify.gaussian import gaussian_identity_check
from verify.reports import ReportList, VerificationReport
from verify.suite import Job
from .cli import run
from .config import RunConfig, parse_complex
from .emit import HISTOGRAM_FIELDS, emit_results, plot_script
from .models import RunRecord


class TempDirMixin:
    def setUp(self):
        super().setUp()
        self._tmp = tempfile.TemporaryDirectory()
        self.tmp = Path(self._tmp.name)

    def tearDown(self):
        self._tmp.cleanup()
        super().tearDown()


class RunConfigTest(TempDirMixin, TestCase):
    def test_defaults(self):
        config = RunConfig.build("dos", {})
        self.assertEqual(config.cls, "A")
        self.assertEqual(config.format, "csv")
        self.assertGreaterEqual(config.workers, 1)

    def test_complex_parsing(self):
        self.assertEqual(parse_complex("0,-1"), -1j)
        self.assertEqual(parse_complex("-1j"), -1j)
        self.assertEqual(parse_complex("0.5"), 0.5)
        with self.assertRaises(UsageError):
            parse_complex("a,b")

    def test_sources(self):
        config = RunConfig.build("zgen", {"cls": "c", "alphas": ["0,-1"], "betas": ["0,0"]})
        self.assertEqual(config.cls, "C")
        self.assertEqual(config.sources().alphas, (-1j,))
        self.assertEqual(config.snapshot()["alphas"], [[0.0, -1.0]])

    def test_half_plane_is_quoted(self):
        with self.assertRaisesRegex(UsageError, "Im alpha"):
            RunConfig.build("zgen", {"cls": "C", "alphas": ["0,1"], "betas": ["0,0"]})

    def test_invalid_values(self):
        with self.assertRaises(UsageError):
            RunConfig.build("dos", {"cls": "Q"})
        with self.assertRaises(UsageError):
            RunConfig.build("dos", {"N": 0})
        with self.assertRaises(UsageError):
            RunConfig.build("zgen", {"alphas": ["0,-1"], "betas": []})
        with self.assertRaises(UsageError):
            RunConfig.build("zgen", {"alphas": ["0,-1"], "betas": ["0,0"], "n": 2})

    def test_chiral_blocks(self):
        with self.assertRaises(UsageError):
            RunConfig.build("sample", {"cls": "AIII", "N": 2, "blocks": [1, 3]})

    def test_config_file_under_flags(self):
        path = self.tmp / "run.cfg"
        path.write_text("# ensemble\nclass = C\nN = 3\nnsamples = 50\nalpha = 0,-1; 0.2,-0.5\nbeta = 0,0; 1,0\n")
        config = RunConfig.build("zgen", {"config_file": str(path), "N": 4})
        self.assertEqual(config.cls, "C")
        self.assertEqual(config.N, 4)
        self.assertEqual(config.nsamples, 50)
        self.assertEqual(config.sources().n, 2)

    def test_unknown_config_key(self):
        path = self.tmp / "run.cfg"
        path.write_text("colour = blue\n")
        with self.assertRaises(UsageError):
            RunConfig.build("dos", {"config_file": str(path)})

    def test_missing_config_file(self):
        with self.assertRaises(UsageError):
            RunConfig.build("dos", {"config_file": str(self.tmp / "absent.cfg")})


class EmitTest(TempDirMixin, TestCase):
    def test_empty_records_header_only(self):
        path = self.tmp / "empty.csv"
        files = emit_results([], "csv", path, fields=("a", "b"))
        self.assertEqual(path.read_text().splitlines(), ["a,b"])
        meta = json.loads(files[1].read_text())
        self.assertEqual(meta["records"], 0)

    def test_empty_records_need_fields(self):
        with self.assertRaises(UsageError):
            emit_results([], "csv", self.tmp / "x.csv")

    def test_histogram_has_four_columns(self):
        hist = SpectralHistogram(
            edges=np.array([-1.0, 0.0, 1.0]),
            counts=np.array([3.0, 5.0]),
            density=np.array([0.3, 0.5]),
            stderr=np.array([0.01, 0.02]),
            nsamples=10,
        )
        path = self.tmp / "dos.csv"
        emit_results(hist, "csv", path, snapshot={"seed": 4})
        with path.open(newline="") as fh:
            rows = list(csv.reader(fh))
        self.assertEqual(tuple(rows[0]), HISTOGRAM_FIELDS)
        self.assertEqual(len(rows), 3)
        self.assertTrue(all(len(row) == 4 for row in rows))
        meta = json.loads(path.with_name("dos.csv.meta.json").read_text())
        self.assertEqual(meta["seed"], 4)
        self.assertEqual(meta["schema"], "superrmt.results/1")

    def test_reports_validate(self):
        reports = [
            VerificationReport.compare("a", 1.0, 1.0),
            VerificationReport.failure("b", UsageError("no")),
        ]
        path = self.tmp / "verify.json"
        emit_results(reports, "json", path, snapshot={"seed": 1, "suite": "core"})
        parsed = ReportList.validate_json(path.read_text())
        self.assertEqual([r.identity for r in parsed], ["a", "b"])
        self.assertEqual(parsed[0].method["run"]["seed"], 1)

    def test_field_order_is_stable(self):
        path = self.tmp / "rows.json"
        emit_results([{"b": 1, "a": 2}], "json", path, snapshot={"seed": 0})
        self.assertEqual(list(json.loads(path.read_text())[0]), ["b", "a", "run"])

    def test_unwritable_path(self):
        blocker = self.tmp / "file"
        blocker.write_text("")
        with self.assertRaises(OutputError) as ctx:
            emit_results([{"a": 1}], "csv", blocker / "out.csv")
        self.assertEqual(ctx.exception.path, blocker / "out.csv")
        self.assertEqual(ctx.exception.exit_code, 3)

    def test_plot_script(self):
        script = plot_script(self.tmp / "dos.csv", title="A(N=4)", reference="sin(x)")
        self.assertIn("'dos.csv'", script)
        self.assertIn("sin(x) with lines", script)


class RunRecordTest(TestCase):
    def test_run_id(self):
        record = RunRecord.objects.create(subcommand="info")
        self.assertRegex(record.run_id, r"^RUN-[0-9A-F]{8}$")
        self.assertEqual(record.status, "Running")
        self.assertIn(record.run_id, str(record))


class CommandTest(TempDirMixin, TestCase):
    def call(self, *args):
        out = StringIO()
        call_command(*args, "--output-dir", str(self.tmp), stdout=out)
        return out.getvalue()

    def test_info(self):
        output = self.call("info", "--class", "C", "--format", "json")
        self.assertIn("SO*(2n)/U(n)", output)
        data = json.loads((self.tmp / "info_C.json").read_text())
        self.assertEqual(data[0]["rss"], "DIII|CI")
        self.assertEqual(RunRecord.objects.get().status, "Passed")

    def test_volumes(self):
        output = self.call("volumes", "--p", "2")
        self.assertIn("vol(S^{2|2})", output)
        with (self.tmp / "volumes_p2.csv").open(newline="") as fh:
            rows = list(csv.DictReader(fh))
        self.assertAlmostEqual(float(rows[0]["re"]), 4 * np.pi, places=5)

    def test_sample_is_reproducible(self):
        self.call("sample", "--class", "C", "--N", "2", "--nsamples", "3", "--seed", "9")
        path = self.tmp / "sample_C_N2_seed9.csv"
        first = path.read_bytes()
        self.call("sample", "--class", "C", "--N", "2", "--nsamples", "3", "--seed", "9")
        self.assertEqual(path.read_bytes(), first)
        self.assertEqual(len(first.decode().splitlines()), 1 + 3 * 4)

    def test_dos(self):
        self.call("dos", "--class", "A", "--N", "4", "--nsamples", "200", "--bins", "10", "--seed", "2")
        self.assertTrue((self.tmp / "dos_A_N4_seed2.csv").exists())
        script = (self.tmp / "dos_A_N4_seed2.gp").read_text()
        self.assertIn("sqrt", script)
        record = RunRecord.objects.get()
        self.assertEqual(record.seed, 2)
        self.assertEqual(record.config["bins"], 10)

    def test_zgen(self):
        self.call("zgen", "--class", "C", "--N", "1", "--alpha", "0,-1", "--beta", "0,0",
                  "--nsamples", "400", "--seed", "5", "--format", "json")
        rows = json.loads((self.tmp / "zgen_C_N1_seed5.json").read_text())
        self.assertEqual([row["method"] for row in rows], ["quadrature", "monte_carlo"])
        self.assertEqual(rows[1]["run"]["seed"], 5)
        exact = complex(rows[0]["re"], rows[0]["im"])
        estimate = complex(rows[1]["re"], rows[1]["im"])
        self.assertLess(abs(exact - estimate), 6 * rows[1]["stderr"] + 1e-12)

    def test_usage_error(self):
        with self.assertRaises(CommandError) as ctx:
            self.call("zgen", "--class", "C", "--alpha", "0,1", "--beta", "0,0")
        self.assertEqual(ctx.exception.returncode, 1)
        self.assertFalse(RunRecord.objects.exists())


def _golden_jobs(name, seed=0):
    return [Job("gaussian_identity[c=1,golden]", gaussian_identity_check,
                {"c": 1, "a": np.array([[0.7]]), "src": SourceMatrix([-1j], [0.3])})]


def _failing_jobs(name, seed=0):
    return [Job("gaussian_identity[c=1,real alpha]", gaussian_identity_check,
                {"c": 1, "a": np.array([[0.7]]), "src": SourceMatrix([0.5], [0.3])})]


class RunTest(TempDirMixin, TestCase):
    def test_unknown_subcommand(self):
        self.assertEqual(run(["bogus"]), 1)
        self.assertEqual(run([]), 1)

    def test_volumes(self):
        self.assertEqual(run(["volumes", "--p", "1", "--output-dir", str(self.tmp)]), 0)

    def test_bad_class(self):
        self.assertEqual(run(["info", "--class", "Z", "--output-dir", str(self.tmp)]), 1)

    def test_output_error(self):
        blocker = self.tmp / "file"
        blocker.write_text("")
        self.assertEqual(run(["info", "--output-dir", str(blocker)]), 3)
        self.assertEqual(RunRecord.objects.get().status, "Error")

    @mock.patch("verify.suite.build_jobs", _golden_jobs)
    def test_verify_passes(self):
        self.assertEqual(run(["verify", "--output-dir", str(self.tmp), "--format", "json",
                              "--schema", str(self.tmp / "schema.json")]), 0)
        reports = ReportList.validate_json((self.tmp / "verify_core_seed20240611.json").read_text())
        self.assertTrue(reports[0].passed)
        schema = json.loads((self.tmp / "schema.json").read_text())
        self.assertEqual(schema["$id"], "superrmt.results/1")

    @mock.patch("verify.suite.build_jobs", _failing_jobs)
    def test_verify_failure_exit_code(self):
        self.assertEqual(run(["verify", "--output-dir", str(self.tmp)]), 2)
        self.assertEqual(RunRecord.objects.get().status, "Failed")
