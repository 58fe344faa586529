"""Prompt templates packaged as data files.

Templates use {{name}} placeholders, substituted in a single pass so values
containing braces are never re-expanded. A placeholder without a value is an
error; so is a value without a placeholder.
"""
from __future__ import annotations

import re
from importlib import resources

from .errors import ValidationError

_PLACEHOLDER_RE = re.compile(r"\{\{(\w+)\}\}")


def load_asset_text(name: str) -> str:
    return (
        resources.files("veritas").joinpath("assets", name).read_text(encoding="utf-8")
    )


def render_template(template: str, values: dict[str, str]) -> str:
    seen: set[str] = set()

    def sub(match: re.Match) -> str:
        key = match.group(1)
        seen.add(key)
        if key not in values:
            raise ValidationError(f"template placeholder {{{{{key}}}}} has no value")
        return values[key]

    rendered = _PLACEHOLDER_RE.sub(sub, template)
    unused = set(values) - seen
    if unused:
        raise ValidationError(f"values never used by template: {sorted(unused)}")
    return rendered
