import json
import logging
import math
import sys
from pathlib import Path
from typing import Optional, Union

import jsonschema
import pandas as pd
from pydantic import BaseModel

logger = logging.getLogger(__name__)

SCHEMA_VERSION = "1.0"
SCHEMA_DIR = Path(__file__).resolve().parent.parent / "schemas"

# Fixed CSV headers
TRAJECTORY_COLUMNS = ["replica", "step", "m"]
QB_SWEEP_COLUMNS = ["t", "bhat", "exact", "leading", "residual"]

Document = dict


# JSON has no literal for these; -inf is a legitimate log weight
def _sentinel(value: float) -> str:
    if math.isnan(value):
        return "NaN"
    return "Infinity" if value > 0 else "-Infinity"


def _jsonable(value):
    if isinstance(value, float) and not math.isfinite(value):
        return _sentinel(value)
    if isinstance(value, dict):
        return {k: _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    return value


def _encode(value) -> str:
    if isinstance(value, bool) or value is None:
        return json.dumps(value)
    if isinstance(value, float):
        if not math.isfinite(value):
            return json.dumps(_sentinel(value))
        text = format(value, ".17g")
        return text if any(ch in text for ch in ".e") else text + ".0"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, str):
        return json.dumps(value)
    if isinstance(value, dict):
        return "{" + ", ".join(f"{json.dumps(str(k))}: {_encode(v)}" for k, v in value.items()) + "}"
    if isinstance(value, (list, tuple)):
        return "[" + ", ".join(_encode(v) for v in value) + "]"
    raise TypeError(f"cannot serialize {type(value).__name__}")


def to_json(doc: Document) -> str:
    """JSON text with every float written to 17 significant digits."""
    return _encode(doc) + "\n"


def build_document(results: Union[BaseModel, dict], kind: str) -> Document:
    body = results.model_dump() if isinstance(results, BaseModel) else dict(results)
    body = _jsonable(body)
    return {"schema_version": SCHEMA_VERSION, "kind": kind, **body}


def validate_document(doc: Document, kind: Optional[str] = None):
    kind = kind or doc.get("kind")
    with open(SCHEMA_DIR / f"{kind}.schema.json") as f:
        schema = json.load(f)
    jsonschema.validate(doc, schema)


def emit_report(results: Union[BaseModel, dict], kind: str, output: Optional[Path] = None) -> Document:
    """Wrap, validate and write a result document; stdout when no output path is given."""
    doc = build_document(results, kind)
    validate_document(doc, kind)
    text = to_json(doc)
    if output is None:
        sys.stdout.write(text)
    else:
        Path(output).write_text(text)
        logger.info(f"Wrote {kind} document to {output}")
    return doc


def load_document(path: Path) -> Document:
    with open(path) as f:
        doc = json.load(f)
    validate_document(doc)
    return doc


def strip_envelope(doc: Document) -> dict:
    return {k: v for k, v in doc.items() if k not in ("schema_version", "kind")}


def write_frame(frame: pd.DataFrame, path: Path, columns: list[str]):
    missing = [c for c in columns if c not in frame.columns]
    if missing:
        raise ValueError(f"frame is missing columns {missing}")
    frame[columns].to_csv(path, index=False, float_format="%.17g")
    logger.info(f"Wrote {len(frame)} rows to {path}")
