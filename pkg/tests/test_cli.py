import pytest

from gridspec import InputError, analyze, parse_document
from gridspec.analyzer import CellId
from gridspec.cli import main, load_inputs
from gridspec.evaluator import Boolean, Number

from helpers import FIXTURES, fixture_text


@pytest.fixture
def loans_symtab():
    symtab, _, _ = analyze(parse_document(fixture_text("loans")))
    return symtab


def write_inputs(tmp_path, text):
    path = tmp_path / "inputs.csv"
    path.write_text(text, encoding="utf-8")
    return path


class TestLoadInputs:
    def test_fixture_file(self, loans_symtab):
        bindings = load_inputs(FIXTURES / "loans_inputs.csv", loans_symtab)
        assert bindings[CellId("initial_cash", ())] == Number(100.0)
        assert bindings[CellId("has_ceiling", (1,))] == Boolean(True)
        assert bindings[CellId("ceiling", (2,))] == Number(37.0)
        # blank periods stay unbound rather than bound to zero
        assert CellId("want_to_borrow_during_period", (11,)) not in bindings

    def test_unknown_table(self, loans_symtab, tmp_path):
        path = write_inputs(tmp_path, "no_such_table,1,5\n")
        with pytest.raises(InputError) as info:
            load_inputs(path, loans_symtab)
        assert info.value.code == "UnknownTable"

    def test_binding_to_derived_table(self, loans_symtab, tmp_path):
        path = write_inputs(tmp_path, "total_cash_at_end_of_period,1,5\n")
        with pytest.raises(InputError) as info:
            load_inputs(path, loans_symtab)
        assert info.value.code == "BindingToDerivedTable"

    def test_bad_arity(self, loans_symtab, tmp_path):
        path = write_inputs(tmp_path, "initial_cash,1,100\n")
        with pytest.raises(InputError) as info:
            load_inputs(path, loans_symtab)
        assert info.value.code == "BadArity"

    def test_index_out_of_bounds(self, loans_symtab, tmp_path):
        path = write_inputs(tmp_path, "expenses_during_period,13,5\n")
        with pytest.raises(InputError) as info:
            load_inputs(path, loans_symtab)
        assert info.value.code == "BadValue"

    def test_type_mismatch(self, loans_symtab, tmp_path):
        path = write_inputs(tmp_path, "has_ceiling,1,42\n")
        with pytest.raises(InputError) as info:
            load_inputs(path, loans_symtab)
        assert info.value.code == "BadValue"

    def test_duplicate_binding(self, loans_symtab, tmp_path):
        path = write_inputs(tmp_path, "initial_cash,100\ninitial_cash,200\n")
        with pytest.raises(InputError) as info:
            load_inputs(path, loans_symtab)
        assert info.value.code == "DuplicateBinding"

    def test_blank_lines_skipped(self, loans_symtab, tmp_path):
        path = write_inputs(tmp_path, "\ninitial_cash,100\n\n")
        assert len(load_inputs(path, loans_symtab)) == 1


class TestCheckCommand:
    def test_clean_spec(self):
        assert main(["check", str(FIXTURES / "loans.gsx")]) == 0

    def test_spec_error(self, tmp_path, capsys):
        bad = tmp_path / "bad.gsx"
        bad.write_text("bounds b: 1 to 3.\nfoo[t] = 1.\n", encoding="utf-8")
        assert main(["check", str(bad)]) == 1
        out = capsys.readouterr().out
        assert "UnknownTable" in out

    def test_diagnostic_format(self, tmp_path, capsys):
        bad = tmp_path / "bad.gsx"
        bad.write_text("bounds b: 1 to 3.\ntable x : b -> number.\n"
                       "x[t] = if( 1, 2, 3 ).\n", encoding="utf-8")
        assert main(["check", str(bad)]) == 1
        first = capsys.readouterr().out.splitlines()[0]
        severity, code, position = first.split()[:3]
        assert severity == "error"
        assert code == "BooleanExpected"
        assert ":" in position

    def test_missing_file(self):
        assert main(["check", "/no/such/file.gsx"]) == 2


class TestEvalCommand:
    def test_values_written(self, tmp_path):
        out = tmp_path / "values.csv"
        code = main(["eval", str(FIXTURES / "cashflow.gsx"),
                     "--inputs", str(FIXTURES / "cashflow_inputs.csv"),
                     "--out", str(out)])
        assert code == 0
        rows = out.read_text(encoding="utf-8").splitlines()
        assert rows[2].split(",")[4] == "95.00"   # first end-of-period value

    def test_out_dir_writes_every_sheet(self, tmp_path):
        out = tmp_path / "values"
        code = main(["eval", str(FIXTURES / "cashflow.gsx"),
                     "--inputs", str(FIXTURES / "cashflow_inputs.csv"),
                     "--out-dir", str(out)])
        assert code == 0
        assert (out / "Model.values.csv").is_file()
        assert (out / "Time.values.csv").is_file()

    def test_cycle_is_runtime_error(self, tmp_path):
        spec = tmp_path / "cycle.gsx"
        spec.write_text("bounds b: 1 to 1.\n"
                        "table a : b -> number.\ntable c : b -> number.\n"
                        "a[t] = c[t].\nc[t] = a[t].\n", encoding="utf-8")
        assert main(["eval", str(spec), "--out", str(tmp_path / "x.csv")]) == 3

    def test_missing_output_target(self):
        assert main(["eval", str(FIXTURES / "cashflow.gsx")]) == 2


class TestCompileAndVerify:
    @pytest.mark.parametrize("name", ["cashflow", "borrowing", "loans"])
    def test_round_trip(self, name, tmp_path, capsys):
        out = tmp_path / name
        assert main(["compile", str(FIXTURES / f"{name}.gsx"),
                     "--inputs", str(FIXTURES / f"{name}_inputs.csv"),
                     "--out-dir", str(out)]) == 0
        assert (out / "manifest.json").is_file()
        assert (out / "Model.formulas.csv").is_file()
        assert (out / "Model.values.csv").is_file()
        assert main(["verify", str(out)]) == 0
        assert "0 mismatch(es)" in capsys.readouterr().out

    def test_verify_detects_corruption(self, tmp_path, capsys):
        out = tmp_path / "grid"
        main(["compile", str(FIXTURES / "cashflow.gsx"),
              "--inputs", str(FIXTURES / "cashflow_inputs.csv"),
              "--out-dir", str(out)])
        values_path = out / "Model.values.csv"
        values_path.write_text(
            values_path.read_text(encoding="utf-8").replace("40.00", "41.00"),
            encoding="utf-8")
        assert main(["verify", str(out)]) == 1
        assert "mismatch" in capsys.readouterr().out

    def test_verify_missing_manifest(self, tmp_path):
        assert main(["verify", str(tmp_path)]) == 2

    def test_bad_inputs_exit_code(self, tmp_path):
        bad = tmp_path / "bad.csv"
        bad.write_text("initial_cash,not_a_number\n", encoding="utf-8")
        assert main(["compile", str(FIXTURES / "cashflow.gsx"),
                     "--inputs", str(bad), "--out-dir", str(tmp_path / "o")]) == 1
