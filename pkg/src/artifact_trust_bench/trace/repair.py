"""Best-effort recovery of a single JSON object from raw model output."""

import json
import re
from typing import List

from ..errors import ParseFailure

_HIDDEN_BLOCK = re.compile(r"<(think|thinking|reasoning)>.*?</\1>", re.DOTALL | re.IGNORECASE)
_FENCE = re.compile(r"```[A-Za-z]*")
_VALID_ESCAPES = frozenset('"\\/bfnrtu')
_CLOSERS = {"{": "}", "[": "]"}


def _is_object(text: str) -> bool:
    try:
        return isinstance(json.loads(text), dict)
    except json.JSONDecodeError:
        return False


def _drop_trailing_comma(out: List[str]) -> None:
    i = len(out) - 1
    while i >= 0 and not out[i].strip():
        i -= 1
    if i >= 0 and out[i] == ",":
        del out[i]


def _rebalance(text: str) -> str:
    """String-aware pass: fix escapes, drop trailing commas, close what is open.

    Scanning stops at the end of the first complete top-level value, so trailing
    prose after the object is discarded.
    """
    out: List[str] = []
    stack: List[str] = []
    in_string = False
    i = 0
    while i < len(text):
        ch = text[i]
        if in_string:
            if ch == "\\":
                nxt = text[i + 1] if i + 1 < len(text) else ""
                if nxt in _VALID_ESCAPES and nxt:
                    out.append(ch + nxt)
                    i += 2
                    continue
                out.append("\\\\")
            elif ord(ch) < 0x20:
                out.append(json.dumps(ch)[1:-1])
            else:
                out.append(ch)
                if ch == '"':
                    in_string = False
            i += 1
            continue

        if ch == '"':
            in_string = True
        elif ch in _CLOSERS:
            stack.append(_CLOSERS[ch])
        elif ch in "}]":
            _drop_trailing_comma(out)
            if stack:
                stack.pop()
            out.append(ch)
            if not stack:
                return "".join(out)
            i += 1
            continue
        out.append(ch)
        i += 1

    if in_string:
        out.append('"')
    _drop_trailing_comma(out)
    out.extend(reversed(stack))
    return "".join(out)


def repair_raw_output(raw: str) -> str:
    """Return candidate object text recovered from ``raw``.

    Valid objects come back stripped and otherwise untouched. Otherwise hidden
    reasoning blocks and markdown fences are removed, leading text before the
    first ``{`` is cut, and the remainder is rebalanced. Raises ParseFailure
    carrying the raw payload when nothing parseable remains.
    """
    stripped = raw.strip()
    if _is_object(stripped):
        return stripped

    text = _FENCE.sub("", _HIDDEN_BLOCK.sub("", raw))
    start = text.find("{")
    if start < 0:
        raise ParseFailure("no JSON object found in model output", raw)
    candidate = _rebalance(text[start:]).strip()
    if not _is_object(candidate):
        raise ParseFailure("model output could not be repaired into a JSON object", raw)
    return candidate
