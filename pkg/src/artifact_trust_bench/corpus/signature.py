"""Method declaration parsing."""

import re
from dataclasses import dataclass, field
from typing import List, Tuple

MODIFIERS = frozenset(
    {
        "public",
        "private",
        "protected",
        "static",
        "final",
        "abstract",
        "synchronized",
        "native",
        "strictfp",
        "default",
        "transient",
        "volatile",
    }
)

_ANNOTATION = re.compile(r"@[\w.]+(\s*\([^()]*\))?")
_NAME_BEFORE_PAREN = re.compile(r"([A-Za-z_$][\w$]*)\s*$")
_GETTER = re.compile(r"^(get|is|has)[A-Z0-9_]")
_SETTER = re.compile(r"^set[A-Z0-9_]")


@dataclass(frozen=True)
class SignatureInfo:
    name: str
    return_type: str
    modifiers: Tuple[str, ...] = ()
    params: Tuple[str, ...] = field(default_factory=tuple)

    @property
    def is_constructor(self) -> bool:
        return self.return_type == ""

    @property
    def is_void(self) -> bool:
        return self.return_type == "void"

    @property
    def has_params(self) -> bool:
        return len(self.params) > 0

    @property
    def is_entry_point(self) -> bool:
        return (
            self.name == "main"
            and "static" in self.modifiers
            and self.is_void
            and len(self.params) == 1
            and "String" in self.params[0]
        )

    @property
    def is_getter(self) -> bool:
        return bool(_GETTER.match(self.name)) and not self.params

    @property
    def is_setter(self) -> bool:
        return bool(_SETTER.match(self.name)) and len(self.params) == 1


def _strip_type_params(text: str) -> str:
    """Drop a leading ``<...>`` group (method type parameters)."""
    text = text.lstrip()
    if not text.startswith("<"):
        return text
    depth = 0
    for i, ch in enumerate(text):
        if ch == "<":
            depth += 1
        elif ch == ">":
            depth -= 1
            if depth == 0:
                return text[i + 1 :].lstrip()
    return ""


def split_params(text: str) -> List[str]:
    params: List[str] = []
    depth = 0
    current: List[str] = []
    for ch in text:
        if ch in "<([":
            depth += 1
        elif ch in ">)]":
            depth -= 1
        if ch == "," and depth == 0:
            params.append("".join(current).strip())
            current = []
            continue
        current.append(ch)
    tail = "".join(current).strip()
    if tail:
        params.append(tail)
    return [p for p in params if p]


def parse_signature(signature: str) -> SignatureInfo:
    """Parse a Java method or constructor declaration.

    Raises ValueError when no parameter list can be found.
    """
    text = _ANNOTATION.sub(" ", signature.replace("\n", " "))
    open_paren = text.find("(")
    if open_paren < 0:
        raise ValueError(f"not a method declaration: {signature!r}")
    name_match = _NAME_BEFORE_PAREN.search(text[:open_paren])
    if not name_match:
        raise ValueError(f"no method name in: {signature!r}")

    depth = 0
    close_paren = len(text)
    for i in range(open_paren, len(text)):
        if text[i] == "(":
            depth += 1
        elif text[i] == ")":
            depth -= 1
            if depth == 0:
                close_paren = i
                break

    prefix_words = text[: name_match.start()].split()
    modifiers = tuple(w for w in prefix_words if w in MODIFIERS)
    rest = " ".join(w for w in prefix_words if w not in MODIFIERS)
    return_type = _strip_type_params(rest).strip()

    return SignatureInfo(
        name=name_match.group(1),
        return_type=return_type,
        modifiers=modifiers,
        params=tuple(split_params(text[open_paren + 1 : close_paren])),
    )
