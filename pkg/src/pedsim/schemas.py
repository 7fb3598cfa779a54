"""Published JSON schemas for the annotation, report and manifest files."""

from __future__ import annotations

import json
from functools import lru_cache
from importlib import resources

SCHEMAS = ("annotation", "report", "manifest")


@lru_cache(maxsize=None)
def load_schema(name: str) -> dict:
    if name not in SCHEMAS:
        raise KeyError(f"unknown schema {name!r}; available: {', '.join(SCHEMAS)}")
    text = (resources.files("pedsim") / "schemas" / f"{name}.schema.json").read_text(encoding="utf-8")
    return json.loads(text)


def validate(document: dict, name: str) -> None:
    """Raise ``jsonschema.ValidationError`` if ``document`` does not match schema ``name``."""
    import jsonschema

    jsonschema.validate(document, load_schema(name), cls=jsonschema.Draft202012Validator)
