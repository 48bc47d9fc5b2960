"""Prompt template loading and rendering with {{name}} placeholders."""

from __future__ import annotations

import re
from importlib import resources
from pathlib import Path
from typing import Optional

_BLANK_RUN = re.compile(r"\n{3,}")

EXEMPLAR_NAMES = ("exemplar_lastletter", "exemplar_gsm8k")


def load_template(name: str, prompt_dir: Optional[str | Path] = None) -> str:
    """Return the template text, preferring <prompt_dir>/<name>.txt when present."""
    if prompt_dir is not None:
        override = Path(prompt_dir) / f"{name}.txt"
        if override.exists():
            return override.read_text(encoding="utf-8")
    return resources.files("rdolt").joinpath("prompts", f"{name}.txt").read_text(
        encoding="utf-8")


def render(template: str, **values) -> str:
    """Substitute {{key}} placeholders and collapse blank-line runs left by empty blocks."""
    text = template
    for key, value in values.items():
        text = text.replace("{{" + key + "}}", str(value))
    text = _BLANK_RUN.sub("\n\n", text)
    return text.strip() + "\n"


def instructions_block(instructions: str) -> str:
    """The optional task-instructions block; empty instructions render to nothing."""
    if not instructions.strip():
        return ""
    return f"Instructions:\n{instructions.strip()}\n\n"


def block(header: str, body: str) -> str:
    """A labeled block followed by a blank line, or nothing when the body is empty."""
    if not body.strip():
        return ""
    return f"{header}\n{body.strip()}\n\n"
