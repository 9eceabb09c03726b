"""Candidate extraction from a Java source tree or a pre-extracted archive.

Each source file is scanned on its own; results are merged sorted by
(file path, method start offset) so candidate order is deterministic.
"""

import hashlib
import logging
import re
import textwrap
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional

from ..archive import read_models
from .lexer import scrub
from .models import ArtifactBundle

logger = logging.getLogger(__name__)

_DOC_BLOCK = re.compile(r"/\*\*.*?\*/", re.DOTALL)
_ANNOTATION_LINE = re.compile(r"^\s*@\w[\w.]*(\s*\([^)]*\))?\s*$")
_ANNOTATION = re.compile(r"@[\w.]+(\s*\([^()]*\))?")
_TYPE_DECL = re.compile(r"\b(class|interface|enum|record)\b")
_TEST_ANNOTATION = re.compile(r"@Test\b")
_ASSERTION = re.compile(r"\bassert\w*\s*\(|\bAssert\.|\bfail\s*\(")
_TEST_FILE = re.compile(r"Tests?\.java$")


@dataclass(frozen=True)
class MethodSpan:
    path: str
    offset: int
    name: str
    signature: str
    source: str
    javadoc: str


@dataclass(frozen=True)
class TestSpan:
    path: str
    offset: int
    prefix: str
    assertion: Optional[str]


def _matching_brace(code: str, open_index: int) -> int:
    depth = 0
    for i in range(open_index, len(code)):
        if code[i] == "{":
            depth += 1
        elif code[i] == "}":
            depth -= 1
            if depth == 0:
                return i
    return -1


def _dedent_from(text: str, start: int, end: int) -> str:
    line_start = text.rfind("\n", 0, start) + 1
    return textwrap.dedent(text[line_start:end])


def _method_name(declaration: str) -> Optional[str]:
    paren = declaration.find("(")
    if paren < 0:
        return None
    match = re.search(r"([A-Za-z_$][\w$]*)\s*$", declaration[:paren])
    return match.group(1) if match else None


def scan_methods(path: str, text: str) -> List[MethodSpan]:
    """Documented method declarations with bodies in one source file."""
    code = scrub(text).code
    spans: List[MethodSpan] = []
    for doc in _DOC_BLOCK.finditer(text):
        cursor = doc.end()
        brace = code.find("{", cursor)
        semicolon = code.find(";", cursor)
        if brace < 0 or (0 <= semicolon < brace):
            continue
        header = text[cursor:brace]
        decl_lines = [
            ln for ln in header.split("\n") if ln.strip() and not _ANNOTATION_LINE.match(ln)
        ]
        declaration = " ".join(" ".join(decl_lines).split())
        declaration = " ".join(_ANNOTATION.sub(" ", declaration).split())
        if "(" not in declaration or "=" in declaration or _TYPE_DECL.search(declaration):
            continue
        name = _method_name(declaration)
        end = _matching_brace(code, brace)
        if name is None or end < 0:
            continue
        decl_start = cursor + len(header) - len(header.lstrip())
        while _ANNOTATION_LINE.match(text[decl_start : text.find("\n", decl_start)] or ""):
            decl_start = text.find("\n", decl_start) + 1
            decl_start += len(text[decl_start:]) - len(text[decl_start:].lstrip())
        spans.append(
            MethodSpan(
                path=path,
                offset=decl_start,
                name=name,
                signature=declaration,
                source=_dedent_from(text, decl_start, end + 1),
                javadoc=_dedent_from(text, doc.start(), doc.end()),
            )
        )
    return spans


def scan_tests(path: str, text: str) -> List[TestSpan]:
    """Test methods split into the prefix before the first assertion and that assertion."""
    code = scrub(text).code
    spans: List[TestSpan] = []
    for marker in _TEST_ANNOTATION.finditer(code):
        brace = code.find("{", marker.end())
        end = _matching_brace(code, brace) if brace >= 0 else -1
        if end < 0:
            continue
        body_lines = text[brace + 1 : end].split("\n")
        prefix: List[str] = []
        assertion: Optional[str] = None
        for line in body_lines:
            if _ASSERTION.search(line):
                assertion = line.strip()
                break
            if line.strip():
                prefix.append(line.strip())
        spans.append(
            TestSpan(
                path=path,
                offset=marker.start(),
                prefix="\n".join(prefix),
                assertion=assertion,
            )
        )
    return spans


def _sample_id(span: MethodSpan) -> str:
    digest = hashlib.sha256(f"{span.path}:{span.offset}".encode()).hexdigest()[:10]
    return f"{Path(span.path).stem}.{span.name}-{digest}"


def _find_test(name: str, tests: List[TestSpan]) -> Optional[TestSpan]:
    call = re.compile(rf"\b{re.escape(name)}\s*\(")
    return next((t for t in tests if call.search(t.prefix)), None)


def extract_candidates(root: Path) -> List[ArtifactBundle]:
    """Extract candidate bundles from every ``*.java`` file under ``root``."""
    root = Path(root)
    methods: List[MethodSpan] = []
    tests: List[TestSpan] = []
    for file in sorted(root.rglob("*.java")):
        rel = file.relative_to(root).as_posix()
        text = file.read_text(encoding="utf-8", errors="replace")
        if _TEST_FILE.search(file.name):
            tests.extend(scan_tests(rel, text))
        else:
            methods.extend(scan_methods(rel, text))

    methods.sort(key=lambda m: (m.path, m.offset))
    tests.sort(key=lambda t: (t.path, t.offset))
    bundles: List[ArtifactBundle] = []
    for span in methods:
        test = _find_test(span.name, tests)
        bundles.append(
            ArtifactBundle(
                sample_id=_sample_id(span),
                mut_body=span.source,
                signature=span.signature,
                javadoc=span.javadoc,
                test_prefix=test.prefix if test else "",
                reference_assertion=test.assertion if test else None,
                origin=f"{span.path}::{span.name}",
            )
        )
    logger.info(f"Extracted {len(bundles)} candidates ({len(tests)} test methods) from {root}")
    return bundles


def load_candidates(path: Path) -> List[ArtifactBundle]:
    """Candidates from a source directory or a record-per-line archive."""
    path = Path(path)
    if path.is_dir():
        return extract_candidates(path)
    return read_models(path, ArtifactBundle)

