"""Validates JSON specs against the shipped schemas: check_schemas.py SCHEMA_DIR SPEC..."""
import json
import pathlib
import sys

import jsonschema
from referencing import Registry, Resource


def main():
    schema_dir = pathlib.Path(sys.argv[1])
    schemas = {p.name: json.loads(p.read_text()) for p in schema_dir.glob("*.schema.json")}
    registry = Registry().with_resources((name, Resource.from_contents(s)) for name, s in schemas.items())
    failures = 0
    for path in map(pathlib.Path, sys.argv[2:]):
        spec = json.loads(path.read_text())
        name = "structure.schema.json" if "chart" in spec else "norm.schema.json"
        validator = jsonschema.Draft202012Validator(schemas[name], registry=registry)
        errors = list(validator.iter_errors(spec))
        for e in errors:
            print(f"{path}: {e.message}")
        failures += bool(errors)
    print(f"{len(sys.argv) - 2 - failures} valid, {failures} invalid")
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
