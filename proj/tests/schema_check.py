#!/usr/bin/env python3
"""Runs the CLI on the fixtures and validates every JSON document it emits."""
import json
import pathlib
import subprocess
import sys

from jsonschema import Draft202012Validator
from referencing import Registry, Resource

cli, root = sys.argv[1], pathlib.Path(sys.argv[2])
schemas = {p.name: json.loads(p.read_text()) for p in (root / "docs" / "schemas").glob("*.json")}
registry = Registry().with_resources(
    (name, Resource.from_contents(doc)) for name, doc in schemas.items())


def validate(doc, schema):
    v = Draft202012Validator(schemas[schema], registry=registry)
    errors = sorted(v.iter_errors(doc), key=lambda e: list(e.path))
    for e in errors[:5]:
        print(f"  {schema}: {list(e.path)}: {e.message}")
    return not errors


def run(args, allowed=(0,)):
    p = subprocess.run([cli, *args], capture_output=True, text=True)
    if p.returncode not in allowed:
        raise SystemExit(f"{args}: exit {p.returncode}\n{p.stderr}")
    return json.loads(p.stdout)


fx = root / "fixtures"
cases = []
for f in sorted(fx.glob("*.json")):
    cases.append((f"instance {f.name}", json.loads(f.read_text()), "instance.schema.json"))
example = str(fx / "worked_example.json")
tiny = str(fx / "tiny.json")
cases += [
    ("run makespan", run(["run", "--in", example]), "trace.schema.json"),
    ("run lq", run(["run", "--in", example, "--mechanism", "lq", "--q", "2"]), "trace.schema.json"),
    ("run --round", run(["run", "--in", example, "--round", "--seed", "3"]), "trace.schema.json"),
    ("round", run(["round", "--in", example, "--seed", "5"]), "round.schema.json"),
    ("pay fractional", run(["pay", "--in", example]), "ledger.schema.json"),
    ("pay realized", run(["pay", "--in", example, "--mode", "realized", "--seed", "2"]), "ledger.schema.json"),
    ("opt bruteforce", run(["opt", "--in", tiny, "--oracle", "bruteforce"]), "opt.schema.json"),
    ("opt lb", run(["opt", "--in", example, "--oracle", "lb", "--q", "2"]), "opt.schema.json"),
    ("test-monotone", run(["test-monotone", "--trials", "5", "--emit", "json"]), "report.schema.json"),
    ("counterexample", run(["counterexample", "llw", "--emit", "json"]), "report.schema.json"),
]

ok = True
for name, doc, schema in cases:
    good = validate(doc, schema)
    print(f"{'ok  ' if good else 'FAIL'} {name}")
    ok &= good
sys.exit(0 if ok else 1)
