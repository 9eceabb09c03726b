"""Labeled artifact sections shared by the elicitation and mutation prompts."""

import re
from typing import Dict

from .types import SOURCES, Artifact

SECTION_TITLES: Dict[Artifact, str] = {
    Artifact.JAVADOC: "Javadoc",
    Artifact.SIGNATURE: "Signature",
    Artifact.MUT: "MUT",
    Artifact.TEST_PREFIX: "Test Prefix",
}

_SECTION = re.compile(
    r"^### (Javadoc|Signature|MUT|Test Prefix)\n```java\n(.*?)\n```$",
    re.MULTILINE | re.DOTALL,
)


def render_sections(artifacts: Dict[Artifact, str]) -> str:
    """Four fenced sections in canonical order."""
    blocks = []
    for artifact in SOURCES:
        blocks.append(f"### {SECTION_TITLES[artifact]}\n```java\n{artifacts[artifact]}\n```")
    return "\n\n".join(blocks)


def parse_sections(text: str) -> Dict[Artifact, str]:
    """Inverse of :func:`render_sections` for the sections present in ``text``."""
    by_title = {title: artifact for artifact, title in SECTION_TITLES.items()}
    return {by_title[m.group(1)]: m.group(2) for m in _SECTION.finditer(text)}
