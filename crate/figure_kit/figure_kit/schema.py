"""CSV schemas shared with the rkpairs command."""

import csv
import json
from pathlib import Path

SCHEMAS = json.loads((Path(__file__).with_name("schemas.json")).read_text())


class SchemaError(ValueError):
    pass


def read_csv(path, kind, required=None):
    """Rows of an rkpairs CSV as dicts, skipping `#` provenance lines.

    `required` defaults to the full schema of `kind`.
    """
    lines = [l for l in Path(path).read_text().splitlines() if l and not l.startswith("#")]
    if not lines:
        raise SchemaError(f"{path}: empty CSV")
    reader = csv.DictReader(lines)
    header = reader.fieldnames or []
    missing = [c for c in (required or SCHEMAS[kind]) if c not in header]
    if missing:
        raise SchemaError(
            f"{path}: missing column(s) {', '.join(missing)}; available: {', '.join(header)}"
        )
    rows = list(reader)
    if not rows:
        raise SchemaError(f"{path}: no data rows")
    return rows
