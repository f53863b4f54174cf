"""Descriptor files, deterministic report emission, and the CLI commands."""

import json
import math

import numpy as np
import pytest

from bergman_lab.cli import main
from bergman_lab.errors import DescriptorError, SymbolFormError
from bergman_lab.serialize import (dumps_report, fmt_float, load_weight_file,
                                   load_symbol_file, parse_symbol, parse_weight,
                                   report_envelope, validate_report, write_csv)


class TestFloatFormat:
    def test_twelve_digits(self):
        assert fmt_float(0.5) == "0.5"
        assert fmt_float(1.0 / 3.0) == "0.3333333333333333"  # 12g does not round-trip
        assert fmt_float(0.333333333333) == "0.333333333333"
        assert float(fmt_float(math.pi)) == math.pi

    def test_non_finite_to_null(self):
        assert fmt_float(float("nan")) == "null"
        assert fmt_float(float("inf")) == "null"


class TestDumps:
    def test_deterministic_and_parseable(self):
        doc = report_envelope("diagnose", "w", 2, {"tol": 1e-8},
                              {"values": [1.0, 2.5, None], "flag": True})
        s1, s2 = dumps_report(doc), dumps_report(doc)
        assert s1 == s2
        parsed = json.loads(s1)
        assert validate_report(parsed) == []
        assert parsed["results"]["values"][2] is None

    def test_validate_flags_problems(self):
        assert validate_report({"schema_version": "x"}) != []


class TestWeightDescriptors:
    def test_round_trip(self, tmp_path):
        doc = {"kind": "standard", "alpha": 1.5, "label": "a15"}
        p = tmp_path / "w.json"
        p.write_text(json.dumps(doc))
        w = load_weight_file(p)
        assert w.label == "a15"
        assert w(0.5) == pytest.approx(0.75 ** 1.5)
        assert w.descriptor()["alpha"] == 1.5

    def test_missing_field_named(self):
        with pytest.raises(DescriptorError) as excinfo:
            parse_weight({"kind": "exponential", "c": 1.0})
        assert excinfo.value.field == "beta"

    def test_bad_kind_named(self):
        with pytest.raises(DescriptorError) as excinfo:
            parse_weight({"kind": "gaussian"})
        assert excinfo.value.field == "kind"

    def test_malformed_json_reports_line(self, tmp_path):
        p = tmp_path / "w.json"
        p.write_text('{"kind": "standard",\n  "alpha": }')
        with pytest.raises(DescriptorError) as excinfo:
            load_weight_file(p)
        assert "line 2" in str(excinfo.value)

    def test_tabulated_csv(self, tmp_path):
        r = np.linspace(0, 0.99, 50)
        csv_path = tmp_path / "samples.csv"
        csv_path.write_text("r,value\n" + "\n".join(
            f"{ri},{1 - ri * ri}" for ri in r) + "\n")
        p = tmp_path / "w.json"
        p.write_text(json.dumps({"kind": "tabulated",
                                 "samples_csv": "samples.csv"}))
        w = load_weight_file(p)
        assert w(0.3) == pytest.approx(0.91, abs=1e-4)

    def test_bad_csv_line_reported(self, tmp_path):
        csv_path = tmp_path / "samples.csv"
        csv_path.write_text("r,value\n0.0,1.0\n0.5,oops\n")
        p = tmp_path / "w.json"
        p.write_text(json.dumps({"kind": "tabulated",
                                 "samples_csv": str(csv_path)}))
        with pytest.raises(DescriptorError) as excinfo:
            load_weight_file(p)
        assert "line 3" in str(excinfo.value)


class TestSymbolDescriptors:
    def test_variants(self, tmp_path):
        for doc, kind in [
            ({"kind": "monomial", "multi_index": [1, 0]}, "monomial"),
            ({"kind": "conj_monomial", "multi_index": [2, 0]}, "conj_monomial"),
            ({"kind": "radial_indicator", "r_lo": 0.1, "r_hi": 0.9},
             "radial_indicator"),
            ({"kind": "unimodular_phase", "multi_index": [2, 0],
              "multi_index_2": [1, 0]}, "unimodular_phase"),
        ]:
            p = tmp_path / "s.json"
            p.write_text(json.dumps(doc))
            assert load_symbol_file(p).kind == kind

    def test_custom_needs_polar_grid(self):
        with pytest.raises(SymbolFormError):
            parse_symbol({"kind": "custom", "sup_norm_bound": 1.0,
                          "values": [[1.0]]})


class TestCsv:
    def test_header_lf_and_floats(self, tmp_path):
        p = tmp_path / "t.csv"
        write_csv(p, ["parameter", "value"], [[0.5, 1.0 / 3.0], [0.75, None]])
        raw = p.read_bytes()
        assert b"\r" not in raw
        lines = raw.decode().splitlines()
        assert lines[0] == "parameter,value"
        assert lines[1].startswith("0.5,0.333")
        assert lines[2] == "0.75,"


@pytest.fixture()
def weight_file(tmp_path):
    p = tmp_path / "std0.json"
    p.write_text(json.dumps({"kind": "standard", "alpha": 0.0, "label": "std0"}))
    return p


class TestCli:
    def test_diagnose_exit_zero(self, weight_file, tmp_path, capsys):
        out = tmp_path / "rep.json"
        status = main(["diagnose", "--weight", str(weight_file), "--n", "2",
                       "--kmax", "10", "--out", str(out)])
        assert status == 0
        doc = json.loads(out.read_text())
        assert validate_report(doc) == []
        verdicts = {d["criterion_id"]: d["verdict"]
                    for d in doc["results"]["diagnostics"]}
        assert verdicts["dhat-tail-halving"] == "IN_CLASS"
        assert verdicts["regular-tail-density"] == "IN_CLASS"
        assert doc["results"]["beta_estimate"]["beta0"] == 1.0

    def test_diagnose_inconclusive_exit_two(self, tmp_path):
        """A barely-growing borderline weight trips the INCONCLUSIVE path."""
        p = tmp_path / "w.json"
        # ratios stay under the divergence threshold on the k <= 24 grid but
        # the last-quartile slope is clearly positive: neither verdict holds
        p.write_text(json.dumps({"kind": "exponential", "c": 7e-7,
                                 "beta": 1.0, "label": "borderline"}))
        status = main(["diagnose", "--weight", str(p), "--n", "2",
                       "--kmax", "24", "--out", str(tmp_path / "rep.json")])
        assert status == 2
        doc = json.loads((tmp_path / "rep.json").read_text())
        verdicts = [d["verdict"] for d in doc["results"]["diagnostics"]]
        assert "INCONCLUSIVE" in verdicts

    def test_malformed_descriptor_exit_one(self, tmp_path, capsys):
        p = tmp_path / "w.json"
        p.write_text(json.dumps({"kind": "standard"}))
        status = main(["diagnose", "--weight", str(p)])
        assert status == 1
        assert "alpha" in capsys.readouterr().err

    def test_kernel_head_row(self, weight_file, tmp_path):
        out = tmp_path / "k.json"
        status = main(["kernel", "--weight", str(weight_file), "--n", "2",
                       "--kmax", "4", "--out", str(out)])
        assert status == 0
        doc = json.loads(out.read_text())
        rows = doc["results"]["rows"]
        # rows with s = 0 must carry the head coefficient c_0 = 1
        zero_rows = [row for row in rows if row[1] == 0.0]
        assert zero_rows and all(row[2] == pytest.approx(1.0) for row in zero_rows)

    def test_project_monomial(self, weight_file, tmp_path):
        sym = tmp_path / "sym.json"
        sym.write_text(json.dumps({"kind": "monomial", "multi_index": [1, 0]}))
        out = tmp_path / "p.json"
        status = main(["project", "--weight", str(weight_file), "--n", "2",
                       "--kmax", "3", "--symbol", str(sym), "--out", str(out)])
        assert status == 0
        doc = json.loads(out.read_text())
        for r, re, im, dens in doc["results"]["rows"]:
            assert re == pytest.approx(r, abs=1e-8)
            assert dens == pytest.approx((1 - r * r) * r, abs=1e-8)

    def test_hl_check_deterministic_and_passing(self, weight_file, tmp_path):
        out1, out2 = tmp_path / "h1.json", tmp_path / "h2.json"
        for out in (out1, out2):
            status = main(["hl-check", "--weight", str(weight_file),
                           "--seed", "0", "--trials", "25", "--out", str(out)])
            assert status == 0
        assert out1.read_bytes() == out2.read_bytes()
        doc = json.loads(out1.read_text())
        assert doc["results"]["all_pass"] is True

    def test_theorem_csv_profiles(self, weight_file, tmp_path):
        out = tmp_path / "t.json"
        status = main(["theorem", "--weight", str(weight_file), "--n", "2",
                       "--kmax", "5", "--dmax", str(1 << 14),
                       "--format", "csv", "--out", str(out)])
        # the shallow grid leaves the conclusion INCONCLUSIVE (exit 2)
        assert status in (0, 2)
        func_csv = tmp_path / "t-functional.csv"
        assert func_csv.exists()
        lines = func_csv.read_text().splitlines()
        assert lines[0] == "parameter,value"
        assert len(lines) == 6

    def test_missing_symbol_for_project(self, weight_file, capsys):
        status = main(["project", "--weight", str(weight_file), "--n", "2"])
        assert status == 1
        assert "symbol" in capsys.readouterr().err
