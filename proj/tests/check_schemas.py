"""Validate dsmlab JSON and CSV output against the files in schemas/."""

import csv
import io
import json
import subprocess
import sys
from pathlib import Path

import jsonschema


def run(tool, *args):
    out = subprocess.run([tool, *args], check=True, capture_output=True, text=True)
    return out.stdout


def check_report(tool, schema_dir):
    schema = json.loads((schema_dir / "survivor_report.schema.json").read_text())
    report = json.loads(run(tool, "induction", "--a0", "0.20744082301459277", "--N0", "8", "--b", "0.999"))
    jsonschema.validate(report, schema)
    hi = float.fromhex(report["survivors"][0]["hi"])
    assert hi == report["survivors"][0]["hi_dec"], "hex and decimal endpoints disagree"


def check_raster(tool, schema_dir):
    schema = json.loads((schema_dir / "raster.schema.json").read_text())
    text = run(tool, "scan-plane", "--a-range", "0.1,0.9", "--b-range", "0.4,0.95", "--res-a", "4", "--res-b", "4")
    body = [line for line in text.splitlines() if not line.startswith("# ")]
    rows = list(csv.reader(io.StringIO("\n".join(body))))
    names = [c["name"] for c in schema["columns"]]
    assert rows[0] == names, f"header {rows[0]} != {names}"
    classes = next(c for c in schema["columns"] if c["name"] == "class")["values"]
    casts = {"number": float, "integer": int}
    for row in rows[1:]:
        assert len(row) == len(names)
        cls = row[2]
        assert cls in classes, cls
        for col, value in zip(schema["columns"], row):
            needed = col.get("required", False) or cls in col.get("required_for", [])
            if needed:
                assert value != "", f"{col['name']} empty for {cls}"
            if value and col["type"] in casts:
                casts[col["type"]](value)


def main():
    tool, schema_dir = sys.argv[1], Path(sys.argv[2])
    check_report(tool, schema_dir)
    check_raster(tool, schema_dir)
    print("schemas ok")


if __name__ == "__main__":
    main()
