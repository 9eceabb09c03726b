"""Base-sample curation rules.

Line counting is lexical (comment and blank stripping); inputs need not parse.
"""

import re
import unicodedata
from typing import List, NamedTuple

from .javadoc import parse_javadoc
from .lexer import body_of, is_brace_only, scrub, top_level_statements
from .signature import SignatureInfo, parse_signature

MIN_EXECUTABLE_LINES = 8
MAX_EXECUTABLE_LINES = 60
MIN_DESCRIPTION_CHARS = 16
MIN_TEST_PREFIX_CHARS = 20
MIN_JAVADOC_CHARS = 50

# Rule identifiers, in the order they are reported.
RULE_SIGNATURE = "signature-unparseable"
RULE_CONSTRUCTOR = "constructor"
RULE_ENTRY_POINT = "entry-point"
RULE_ACCESSOR = "accessor"
RULE_WRAPPER = "wrapper"
RULE_SUPER_CALL = "super-call"
RULE_LINE_COUNT = "line-count"
RULE_TRIVIAL = "trivial"
RULE_INLINE_COMMENT = "inline-comment"
RULE_EXTRACTION_ARTIFACT = "extraction-artifact"
RULE_INHERIT_DOC = "contains-inheritDoc"
RULE_SHORT_JAVADOC = "short-javadoc"
RULE_SHORT_DESCRIPTION = "short-description"
RULE_TAG_ONLY = "tag-only"
RULE_NON_ENGLISH = "non-english"
RULE_USAGE_WARNING = "usage-warning-only"
RULE_MISSING_RETURN = "missing-@return"
RULE_MISSING_PARAM = "missing-@param"
RULE_SHORT_TEST_PREFIX = "short-test-prefix"
RULE_DUPLICATE = "duplicate"
RULE_REPEATED_NAME = "repeated-name"

_CONTROL_FLOW = re.compile(r"\b(if|switch|for|while|do|try)\b")
_DO_WHILE_TRAILER = re.compile(r"\}\s*while\s*\([^;{}]*\)\s*;")
_DO = re.compile(r"\bdo\b")
_ASSIGNMENT = re.compile(r"(?<![=!<>])(?:<<|>>>|>>|[+\-*/%&|^])?=(?!=)")
_CALL = re.compile(r"\b([A-Za-z_$][\w$]*)\s*\(")
_NOT_CALLS = frozenset(
    {
        "if",
        "for",
        "while",
        "switch",
        "catch",
        "synchronized",
        "return",
        "throw",
        "new",
        "super",
        "this",
        "try",
        "do",
        "else",
        "assert",
        "case",
    }
)
_WARNING_SENTENCE = re.compile(
    r"^\W*(beware|warning|caution|note|important|do not|don't|never call|internal use|"
    r"for internal use|not intended|should not be called|use with care|deprecated)\b",
    re.IGNORECASE,
)
_SENTENCE_SPLIT = re.compile(r"(?<=[.!?])\s+")
_SUPER_CALL = re.compile(r"\bsuper\s*[(.]")


class TrivialityProfile(NamedTuple):
    control_flow_count: int
    assignment_count: int
    call_count: int
    nontrivial: bool


def count_executable_lines(mut_body: str) -> int:
    """Non-blank lines of the method body that are not pure comment or brace lines."""
    code = scrub(body_of(mut_body)).code
    return sum(1 for line in code.split("\n") if line.strip() and not is_brace_only(line))


def _count_calls(code: str) -> int:
    count = 0
    for match in _CALL.finditer(code):
        name = match.group(1)
        if name in _NOT_CALLS:
            continue
        before = code[: match.start()].rstrip()
        if before.endswith("new") and (len(before) == 3 or not before[-4].isalnum()):
            continue
        count += 1
    return count


def classify_triviality(mut_body: str) -> TrivialityProfile:
    """Count control-flow constructs, assignments and calls in the method body.

    Control flow covers conditionals, loops and exception handling; ternaries are
    not counted. Assignments include compound operators and initialized
    declarations.
    """
    code = scrub(body_of(mut_body)).code
    do_loops = len(_DO.findall(code))
    trailers = min(do_loops, len(_DO_WHILE_TRAILER.findall(code)))
    control_flow = len(_CONTROL_FLOW.findall(code)) - trailers
    assignments = len(_ASSIGNMENT.findall(code))
    calls = _count_calls(code)
    nontrivial = control_flow >= 2 or (assignments >= 4 and calls >= 4)
    return TrivialityProfile(control_flow, assignments, calls, nontrivial)


def _is_latin(ch: str) -> bool:
    return unicodedata.name(ch, "").startswith("LATIN")


def is_usage_warning_only(description: str) -> bool:
    sentences = [s for s in _SENTENCE_SPLIT.split(description.strip()) if s.strip()]
    return bool(sentences) and all(_WARNING_SENTENCE.match(s) for s in sentences)


def check_javadoc_rules(javadoc: str, signature: str) -> List[str]:
    """Return documentation rule violations; an empty list means the Javadoc qualifies.

    Inherited documentation short-circuits: the other rules say nothing useful
    about a block that delegates to its parent.
    """
    if "{@inheritDoc}" in javadoc:
        return [RULE_INHERIT_DOC]

    parsed = parse_javadoc(javadoc)
    violations: List[str] = []
    if len(parsed.description) < MIN_DESCRIPTION_CHARS:
        violations.append(RULE_SHORT_DESCRIPTION)
    if not parsed.description and parsed.tags:
        violations.append(RULE_TAG_ONLY)
    if any(ch.isalpha() and not _is_latin(ch) for ch in parsed.description):
        violations.append(RULE_NON_ENGLISH)
    if parsed.description and is_usage_warning_only(parsed.description):
        violations.append(RULE_USAGE_WARNING)

    try:
        info = parse_signature(signature)
    except ValueError:
        return violations
    if not info.is_void and not info.is_constructor and not parsed.has_tag("return"):
        violations.append(RULE_MISSING_RETURN)
    if info.has_params and not parsed.has_tag("param"):
        violations.append(RULE_MISSING_PARAM)
    return violations


def method_kind_rules(info: SignatureInfo, mut_body: str, profile: TrivialityProfile) -> List[str]:
    """Constructor, entry-point, accessor, wrapper and super-call exclusions.

    Accessor and wrapper heuristics yield to a body that is independently
    nontrivial; ``getInstance`` is always an accessor.
    """
    if info.is_constructor:
        return [RULE_CONSTRUCTOR]
    if info.is_entry_point:
        return [RULE_ENTRY_POINT]
    violations: List[str] = []
    if info.name == "getInstance" or (
        (info.is_getter or info.is_setter) and not profile.nontrivial
    ):
        violations.append(RULE_ACCESSOR)
    statements = top_level_statements(scrub(body_of(mut_body)).code)
    if statements <= 1 and profile.control_flow_count == 0 and not profile.nontrivial:
        violations.append(RULE_WRAPPER)
    if _SUPER_CALL.search(scrub(body_of(mut_body)).code):
        violations.append(RULE_SUPER_CALL)
    return violations


def has_inline_comment(mut_body: str) -> bool:
    return scrub(body_of(mut_body)).has_comment


def extraction_artifact(javadoc: str, mut_body: str) -> bool:
    """Embedded documentation blocks left behind by the extractor."""
    return javadoc.count("/**") > 1 or "/**" in mut_body


def review_flags(javadoc: str, mut_body: str) -> List[str]:
    flags: List[str] = []
    if "<pre>" in javadoc.lower():
        flags.append("javadoc-code-sample")
    code = scrub(mut_body).code
    if code.count("{") != code.count("}"):
        flags.append("unbalanced-braces")
    return flags
