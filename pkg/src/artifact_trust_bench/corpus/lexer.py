"""Lexical helpers for Java method text.

Nothing here parses Java; the helpers blank out comments and literals while
preserving offsets and newlines so that regex-based counting stays reliable on
text that may not compile.
"""

import re
from typing import NamedTuple

_BRACE_ONLY = re.compile(r"^[{};\s]*$")


class Scrubbed(NamedTuple):
    code: str
    has_comment: bool


def scrub(text: str) -> Scrubbed:
    """Blank comments and string/char literal contents, keeping length and newlines."""
    out = list(text)
    has_comment = False
    i = 0
    n = len(text)
    while i < n:
        ch = text[i]
        nxt = text[i + 1] if i + 1 < n else ""
        if ch == "/" and nxt == "/":
            has_comment = True
            while i < n and text[i] != "\n":
                out[i] = " "
                i += 1
            continue
        if ch == "/" and nxt == "*":
            has_comment = True
            end = text.find("*/", i + 2)
            stop = n if end < 0 else end + 2
            for j in range(i, stop):
                if text[j] != "\n":
                    out[j] = " "
            i = stop
            continue
        if text.startswith('"""', i):
            end = text.find('"""', i + 3)
            stop = n if end < 0 else end + 3
            for j in range(i + 3, max(i + 3, stop - 3)):
                if text[j] != "\n":
                    out[j] = " "
            i = stop
            continue
        if ch in ('"', "'"):
            j = i + 1
            while j < n and text[j] != ch and text[j] != "\n":
                if text[j] == "\\":
                    out[j] = " "
                    j += 1
                    if j < n and text[j] != "\n":
                        out[j] = " "
                    j += 1
                    continue
                out[j] = " "
                j += 1
            i = j + 1
            continue
        i += 1
    return Scrubbed("".join(out), has_comment)


def body_of(method_text: str) -> str:
    """Text from the first opening brace; the whole text when there is none."""
    code = scrub(method_text).code
    start = code.find("{")
    return method_text if start < 0 else method_text[start:]


def is_brace_only(line: str) -> bool:
    return bool(_BRACE_ONLY.match(line))


def top_level_statements(code: str) -> int:
    """Semicolons outside parentheses in already-scrubbed code."""
    depth = 0
    count = 0
    for ch in code:
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth = max(0, depth - 1)
        elif ch == ";" and depth == 0:
            count += 1
    return count
