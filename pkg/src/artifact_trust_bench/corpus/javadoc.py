"""Line-level structure of documentation comments.

A documentation block is split into its prose description (every line before
the first line whose first non-decoration token starts with ``@``) and its tag
clauses (each tag line plus its wrapped continuation lines).
"""

import re
from dataclasses import dataclass
from typing import List, Optional, Tuple

_TAG = re.compile(r"^@([A-Za-z]+)")


@dataclass(frozen=True)
class DocLine:
    raw: str
    content: str
    opens: bool
    closes: bool

    @property
    def is_tag(self) -> bool:
        return self.content.startswith("@")

    @property
    def tag(self) -> Optional[str]:
        match = _TAG.match(self.content)
        return match.group(1) if match else None


def classify_line(raw: str) -> DocLine:
    """Strip comment decoration (``/**``, leading ``*``, ``*/``) from one line."""
    text = raw.strip()
    opens = text.startswith("/**")
    if opens:
        text = text[3:]
    closes = text.rstrip().endswith("*/")
    if closes:
        text = text.rstrip()[:-2]
    text = text.strip()
    if not opens and text.startswith("*"):
        text = text[1:].strip()
    return DocLine(raw=raw, content=text, opens=opens, closes=closes)


def split_lines(javadoc: str) -> List[DocLine]:
    return [classify_line(raw) for raw in javadoc.split("\n")]


def first_tag_index(lines: List[DocLine]) -> int:
    for i, line in enumerate(lines):
        if line.is_tag:
            return i
    return len(lines)


@dataclass(frozen=True)
class ParsedJavadoc:
    description: str
    tags: Tuple[Tuple[str, str], ...]

    def has_tag(self, name: str) -> bool:
        return any(tag == name for tag, _ in self.tags)


def parse_javadoc(javadoc: str) -> ParsedJavadoc:
    lines = split_lines(javadoc)
    boundary = first_tag_index(lines)
    description = " ".join(line.content for line in lines[:boundary] if line.content).strip()

    tags: List[Tuple[str, str]] = []
    for line in lines[boundary:]:
        if line.is_tag:
            name = line.tag or ""
            tags.append((name, line.content[len(name) + 1 :].strip()))
        elif tags and line.content:
            name, text = tags[-1]
            tags[-1] = (name, f"{text} {line.content}".strip())
    return ParsedJavadoc(description=description, tags=tuple(tags))


def has_delimiters(javadoc: str) -> bool:
    stripped = javadoc.strip()
    return stripped.startswith("/**") and stripped.endswith("*/")


def indent_of(raw: str) -> str:
    return raw[: len(raw) - len(raw.lstrip())]


def empty_shell(javadoc: str) -> str:
    """A documentation block with nothing but its delimiters.

    A pure closer line is reused verbatim; otherwise the closer is aligned one
    column right of the opener.
    """
    if not has_delimiters(javadoc):
        return ""
    raw_lines = [line for line in javadoc.split("\n") if line.strip()]
    indent = indent_of(raw_lines[0])
    last = classify_line(raw_lines[-1])
    if len(raw_lines) > 1 and last.closes and not last.content:
        return f"{indent}/**\n{last.raw}"
    return f"{indent}/**\n{indent} */"
