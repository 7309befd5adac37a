#!/usr/bin/env python3
"""Validate report and manifest files against the schemas in schemas/.

usage: validate_reports.py SCHEMA_DIR FILE_OR_DIR...

The schema is chosen by file name: manifest.json, mc_report.json and
full_report.json have their own schemas, any other *.json uses report.
Exits 0 when every file validates, 1 otherwise, 77 when the jsonschema
package is missing.
"""
import json
import pathlib
import sys

try:
    import jsonschema
    from referencing import Registry, Resource
except ImportError:
    print("jsonschema not available", file=sys.stderr)
    sys.exit(77)

SPECIFIC = {"manifest.json": "manifest", "mc_report.json": "mc_report", "full_report.json": "full_report"}


def load_registry(schema_dir):
    schemas = {}
    for path in sorted(pathlib.Path(schema_dir).glob("*.schema.json")):
        doc = json.loads(path.read_text())
        jsonschema.Draft202012Validator.check_schema(doc)
        schemas[path.name[: -len(".schema.json")]] = doc
    registry = Registry().with_resources((doc["$id"], Resource.from_contents(doc)) for doc in schemas.values())
    return schemas, registry


def main(argv):
    if len(argv) < 3:
        print(__doc__, file=sys.stderr)
        return 2
    schemas, registry = load_registry(argv[1])
    files = []
    for arg in argv[2:]:
        p = pathlib.Path(arg)
        files.extend(sorted(p.rglob("*.json")) if p.is_dir() else [p])
    bad = 0
    for f in files:
        name = SPECIFIC.get(f.name, "report")
        validator = jsonschema.Draft202012Validator(schemas[name], registry=registry)
        errors = sorted(validator.iter_errors(json.loads(f.read_text())), key=lambda e: list(e.path))
        for e in errors:
            print(f"{f}: {'/'.join(map(str, e.path))}: {e.message}")
        bad += bool(errors)
        print(f"{f}: {'invalid' if errors else 'ok'} ({name})")
    return 1 if bad else 0


if __name__ == "__main__":
    sys.exit(main(sys.argv))
