import json
import logging
import os.path
from functools import lru_cache
from os import listdir
from typing import Any
from typing import Iterator

import yaml
from jsonschema import Draft202012Validator

from s2c_compliance.errors import FileAccessError
from s2c_compliance.errors import SchemaError

logger = logging.getLogger(__name__)

PACKAGE_DIR = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
DEFAULT_DATA_DIR = os.path.join(PACKAGE_DIR, "data")
SCHEMA_DIR = os.path.join(PACKAGE_DIR, "schemas")

SAMPLE_CATALOG = "iec62443-4-1-sample.json"
SAMPLE_EXTERNAL_INPUTS = "iec62443-4-1-sample.external.json"
FIXTURE_160_CATALOG = "fixture-160.json"

EXTERNAL_SUFFIX = ".external.json"


def data_path(filename: str, base_dir: str = DEFAULT_DATA_DIR) -> str:
    return os.path.join(base_dir, filename)


def iter_catalog_paths(base_dir: str = DEFAULT_DATA_DIR) -> Iterator[str]:
    """Yields every shipped catalog file, sidecar files excluded."""
    for filename in sorted(listdir(base_dir)):
        if filename.endswith(".json") and not filename.endswith(EXTERNAL_SUFFIX):
            yield os.path.join(base_dir, filename)


def external_inputs_path(catalog_path: str) -> str:
    """The sidecar that declares external inputs for ``catalog_path``."""
    root, _ = os.path.splitext(catalog_path)
    return root + EXTERNAL_SUFFIX


def read_bytes(path: str) -> bytes:
    try:
        with open(path, "rb") as f:
            return f.read()
    except OSError as e:
        raise FileAccessError(str(path), e.strerror or str(e)) from e


def read_text(path: str) -> str:
    raw = read_bytes(path)
    try:
        return raw.decode("utf-8")
    except UnicodeDecodeError as e:
        raise SchemaError(f"not valid UTF-8: {e.reason}", location=f"byte {e.start}") from e


def write_text(path: str, text: str) -> None:
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as f:
            f.write(text)
    except OSError as e:
        raise FileAccessError(str(path), e.strerror or str(e)) from e

    logger.debug("Wrote %d characters to %s", len(text), path)


def load_json_document(path: str) -> Any:
    text = read_text(path)
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        raise SchemaError(e.msg, location=f"line {e.lineno}, column {e.colno}") from e


def load_yaml_document(path: str) -> Any:
    """Loads YAML or JSON (JSON documents are valid YAML)."""
    text = read_text(path)
    try:
        return yaml.safe_load(text)
    except yaml.MarkedYAMLError as e:
        mark = e.problem_mark
        location = f"line {mark.line + 1}, column {mark.column + 1}" if mark else None
        raise SchemaError(e.problem or str(e), location=location) from e
    except yaml.YAMLError as e:
        raise SchemaError(str(e)) from e


@lru_cache(maxsize=None)
def schema_validator(schema_name: str) -> Draft202012Validator:
    with open(os.path.join(SCHEMA_DIR, schema_name), encoding="utf-8") as f:
        schema = json.load(f)

    return Draft202012Validator(schema)


def check_schema(document: Any, schema_name: str) -> None:
    """Raises a SchemaError listing every violation, located by field path."""
    validator = schema_validator(schema_name)
    violations = sorted(
        validator.iter_errors(document),
        key=lambda error: [str(part) for part in error.absolute_path],
    )
    if not violations:
        return

    messages = [f"{_field_path(error.absolute_path)}: {error.message}" for error in violations]
    first = violations[0]
    raise SchemaError(first.message, location=_field_path(first.absolute_path), errors=messages)


def _field_path(path) -> str:
    return "/".join(str(part) for part in path) or "<root>"


def canonical_json(document: Any) -> str:
    """Fixed indentation, UTF-8 text, trailing newline. Key order is the caller's."""
    return json.dumps(document, indent=2, ensure_ascii=False) + "\n"
