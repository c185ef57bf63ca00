"""Shipped JSON schemas and validation helpers for file interchange."""

from __future__ import annotations

import functools
import json
from importlib import resources
from typing import Any, Dict

import jsonschema


class SchemaViolation(ValueError):
    """Instance failed a shipped schema; carries a JSON pointer to the spot."""

    def __init__(self, schema_name: str, pointer: str, message: str):
        super().__init__(f"{schema_name}: at {pointer}: {message}")
        self.schema_name = schema_name
        self.pointer = pointer
        self.detail = message


@functools.lru_cache(maxsize=None)
def load_schema(name: str) -> Dict[str, Any]:
    path = resources.files("uavlofi").joinpath("schemas", f"{name}.schema.json")
    with path.open("r", encoding="utf-8") as fh:
        return json.load(fh)


def validate(instance: Any, schema_name: str) -> None:
    """Check `instance` against a shipped schema, raising SchemaViolation."""
    schema = load_schema(schema_name)
    validator = jsonschema.Draft202012Validator(schema)
    error = jsonschema.exceptions.best_match(validator.iter_errors(instance))
    if error is not None:
        pointer = "/" + "/".join(str(p) for p in error.absolute_path)
        raise SchemaViolation(schema_name, pointer, error.message)
