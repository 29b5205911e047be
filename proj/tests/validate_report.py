"""Runs `mlnet experiment` on a spec and validates report.json against the published schema."""
import json
import subprocess
import sys
import tempfile
from pathlib import Path

import jsonschema


def main() -> int:
    mlnet, spec, schema_path = sys.argv[1:4]
    schema = json.loads(Path(schema_path).read_text())
    with tempfile.TemporaryDirectory() as tmp:
        subprocess.run([mlnet, "experiment", "--synth", spec, "--out", tmp], check=True, stdout=subprocess.DEVNULL)
        report = json.loads((Path(tmp) / "report.json").read_text())
    jsonschema.Draft202012Validator.check_schema(schema)
    errors = sorted(jsonschema.Draft202012Validator(schema).iter_errors(report), key=lambda e: list(e.path))
    for e in errors:
        print(f"{'/'.join(map(str, e.path))}: {e.message}")
    stages = [s["stage"] for s in report["timings"]["stages"]]
    if len(stages) != len(set(stages)):
        print("a stage is reported more than once")
        return 1
    print("report.json valid" if not errors else f"{len(errors)} schema violation(s)")
    return 1 if errors else 0


if __name__ == "__main__":
    sys.exit(main())
