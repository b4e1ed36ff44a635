import json
from pathlib import Path

import pytest

jsonschema = pytest.importorskip("jsonschema")
from referencing import Registry, Resource  # noqa: E402

from padic_rtf.cli import main  # noqa: E402
from padic_rtf.jsonio import dumps  # noqa: E402
from padic_rtf.mellin import mellin  # noqa: E402
from padic_rtf.orbital import kuznetsov_basic  # noqa: E402

SCHEMAS = Path(__file__).resolve().parents[1] / "docs" / "schemas"


def _load(name):
    return json.loads((SCHEMAS / f"{name}.schema.json").read_text())


def validate(obj, name):
    registry = Registry().with_resources(
        (f.name, Resource.from_contents(json.loads(f.read_text()))) for f in SCHEMAS.glob("*.json")
    )
    jsonschema.Draft202012Validator(_load(name), registry=registry).validate(obj)


def _run(tmp_path, argv):
    out = tmp_path / "out.json"
    assert main(argv + ["--out", str(out)]) in (0, 1)
    return json.loads(out.read_text())


def test_schemas_are_valid():
    for f in SCHEMAS.glob("*.json"):
        jsonschema.Draft202012Validator.check_schema(json.loads(f.read_text()))


@pytest.mark.parametrize(
    "argv,schema",
    [
        (["pushforward", "--d", "3", "--M", "4"], "measure"),
        (["xside", "--row", "A1"], "measure"),
        (["xside", "--row", "D2", "--M", "2"], "measure"),
        (["kuznetsov", "--group", "sl2", "--window", "0:2"], "kuznetsov_vector"),
        (["germ", "--d", "4"], "germ_profile"),
        (["gamma", "--eta", "ram2", "--a", "1/3"], "gamma"),
        (["table", "--json"], "table"),
        (["check", "--suite", "germs"], "suite_result"),
        (["check", "--suite", "table"], "suite_result"),
    ],
)
def test_cli_artifacts_match_schemas(tmp_path, argv, schema):
    validate(_run(tmp_path, argv), schema)


def test_transfer_outputs_are_measures(tmp_path):
    data = _run(tmp_path, ["transfer", "--row", "D2", "--basic"])
    for out in data["outputs"].values():
        validate(out, "measure")


def test_mellin_symbol_matches_schema():
    f = kuznetsov_basic("pgl2", 3, m=2).measure
    validate(json.loads(dumps(mellin(f, 2))), "mellin_symbol")
