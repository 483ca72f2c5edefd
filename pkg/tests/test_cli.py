import json
import re
from importlib import resources

import jsonschema
import pytest

from invquant.dsl import cli, suites
from invquant.dsl.suites import Check
from invquant.errors import DomainExhausted

SCHEMA = json.loads(resources.files("invquant.dsl").joinpath("output.schema.json").read_text(encoding="utf-8"))

COMMANDS = [
    ["christoffel", "polar"],
    ["christoffel", "spherical"],
    ["christoffel", "identity"],
    ["christoffel", "sphere2"],
    ["star", "polar", "--order", "2"],
    ["star", "twisted", "--order", "2"],
    ["star", "sab", "--order", "2"],
    ["morphism", "polar"],
    ["morphism", "inversion"],
    ["morphism", "sphere2", "--curved", "--alpha", "1/2"],
    ["quantize", "oscillator", "--with", "s_order"],
    ["quantize", "hydrogen", "--with", "s_order", "--transform", "spherical"],
    ["quantize", "hydrogen", "--with", "covariant"],
    ["quantize", "free", "--with", "curved(1/2)"],
    ["quantize", "free", "--with", "curved", "--alpha", "1"],
    ["quantize", "A", "--with", "weyl"],
]


def run(capsys, argv):
    code = cli.main(argv)
    out, err = capsys.readouterr()
    return code, out, err


@pytest.mark.parametrize("argv", COMMANDS, ids=lambda a: "-".join(a[:2]))
def test_json_output_validates(capsys, argv):
    code, out, _ = run(capsys, argv + ["--format", "json"])
    assert code == 0
    jsonschema.validate(json.loads(out), SCHEMA)


def _balanced(text: str) -> bool:
    depth = 0
    for ch in re.sub(r"\\[{}]", "", text):
        depth += {"{": 1, "}": -1}.get(ch, 0)
        if depth < 0:
            return False
    return depth == 0


@pytest.mark.parametrize("argv", COMMANDS, ids=lambda a: "-".join(a[:2]))
def test_latex_output_is_balanced(capsys, argv):
    code, out, _ = run(capsys, argv + ["--format", "latex"])
    assert code == 0
    assert _balanced(out)
    begins = re.findall(r"\\begin\{(\w+\*?)\}", out)
    ends = re.findall(r"\\end\{(\w+\*?)\}", out)
    assert begins == ends[::-1] or begins == ends
    assert out.count(r"\left") == out.count(r"\right")


def test_identity_christoffel_table_is_empty(capsys):
    code, out, _ = run(capsys, ["christoffel", "identity", "--format", "json"])
    assert code == 0
    assert json.loads(out)["entries"] == []


def test_polar_christoffel_text(capsys):
    code, out, _ = run(capsys, ["christoffel", "polar"])
    assert code == 0
    assert "Gamma^r_(theta theta) = -r" in out
    assert "Gamma^theta_(r theta) = 1/r" in out


def test_hydrogen_operator_latex(capsys):
    code, out, _ = run(capsys, ["quantize", "hydrogen", "--with", "s_order", "--transform", "spherical",
                                "--format", "latex"])
    assert code == 0
    assert r"\partial_{r}^{2}" in out
    assert r"\epsilon" in out or "eps" in out


def test_model_file_option(tmp_path, capsys):
    path = tmp_path / "line.iq"
    path.write_text("chart line dim 1 (x):\nend\nhamiltonian H on line: p_x^2/2 + x^2\n", encoding="utf-8")
    code, out, _ = run(capsys, ["quantize", "H", "--with", "weyl", "--model", str(path), "--format", "json"])
    assert code == 0
    doc = json.loads(out)
    assert {t["coefficient"] for t in doc["terms"]} == {"-1/2", "x**2"}


def test_syntax_error_exits_2_with_position(tmp_path, capsys):
    path = tmp_path / "bad.iq"
    path.write_text("chart line dim 1 (x):\nend\nhamiltonian H: x^ = 2\n", encoding="utf-8")
    code, _, err = run(capsys, ["quantize", "H", "--with", "weyl", "--model", str(path)])
    assert code == 2
    assert "line 3" in err and "column" in err


def test_missing_model_file_exits_2(tmp_path, capsys):
    code, _, err = run(capsys, ["christoffel", "polar", "--model", str(tmp_path / "nope.iq")])
    assert code == 2
    assert "nope.iq" in err


def test_unknown_target_exits_2(capsys):
    code, _, err = run(capsys, ["christoffel", "nowhere"])
    assert code == 2
    assert "nowhere" in err


def test_bad_method_exits_2(capsys):
    assert run(capsys, ["quantize", "hydrogen", "--with", "spin"])[0] == 2
    assert run(capsys, ["quantize", "hydrogen", "--with", "weyl", "--alpha", "1"])[0] == 2
    assert run(capsys, ["quantize", "free", "--with", "s_order"])[0] == 2


def test_usage_errors_exit_2():
    with pytest.raises(SystemExit) as info:
        cli.main(["verify", "no-such-suite"])
    assert info.value.code == 2
    with pytest.raises(SystemExit) as info:
        cli.main([])
    assert info.value.code == 2


def test_library_errors_exit_1(monkeypatch, capsys):
    def boom(*args, **kwargs):
        raise DomainExhausted("no admissible points")

    monkeypatch.setattr(cli.commands, "star_product", boom)
    code, _, err = run(capsys, ["star", "polar"])
    assert code == 1
    assert "DomainExhausted" in err and "no admissible points" in err


def _fake_suite(monkeypatch, residual):
    seen = []

    def fn(seed):
        seen.append(seed)
        return [Check("fake/check", residual, 1e-9, 0)]

    monkeypatch.setitem(suites.SUITES, "involution", (fn,))
    return seen


def test_failed_check_exits_1(monkeypatch, capsys):
    _fake_suite(monkeypatch, 1.0)
    code, out, _ = run(capsys, ["verify", "involution", "--format", "json"])
    assert code == 1
    doc = json.loads(out)
    jsonschema.validate(doc, SCHEMA)
    assert doc["passed"] is False


def test_seed_comes_from_flag_then_environment(monkeypatch, capsys):
    seen = _fake_suite(monkeypatch, 0.0)
    monkeypatch.setenv("INVQUANT_SEED", "11")
    assert run(capsys, ["verify", "involution"])[0] == 0
    assert run(capsys, ["verify", "involution", "--seed", "4"])[0] == 0
    monkeypatch.delenv("INVQUANT_SEED")
    assert run(capsys, ["verify", "involution"])[0] == 0
    assert seen == [11, 4, 0]


def test_involution_suite_is_deterministic(capsys):
    first = run(capsys, ["verify", "involution", "--seed", "3", "--format", "json"])
    second = run(capsys, ["verify", "involution", "--seed", "3", "--format", "json"])
    assert first[0] == 0
    assert first == second
