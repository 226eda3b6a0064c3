"""Plain-text formats for behaviors and quasi-distributions.

A behavior file starts with ``scenario: 2,2;2,2`` (settings,outcomes per
party) followed by one ``settings=.. outcomes=.. p=num/den`` line per
nonzero entry.  Omitted entries are zero.  Several behaviors may share a
file when separated by a line holding ``---``.  Lines starting with ``#``
are comments.
"""

from __future__ import annotations

import re
from fractions import Fraction
from pathlib import Path

from .scenario import (
    Behavior,
    NormalizationError,
    QuasiDistribution,
    Scenario,
    ScenarioError,
    atom_assignment,
)

SEPARATOR = "---"

_ENTRY = re.compile(
    r"^settings=(?P<s>[0-9,]+)\s+outcomes=(?P<o>[0-9,]+)\s+p=(?P<p>-?[0-9]+(?:/[0-9]+)?)$"
)
_ATOM = re.compile(r"^atom=(?P<a>[0-9;,]+)\s+p=(?P<p>-?[0-9]+(?:/[0-9]+)?)$")


class ParseError(ValueError):
    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line


def fmt(q: Fraction) -> str:
    q = Fraction(q)
    return f"{q.numerator}/{q.denominator}"


def parse_scenario(text: str) -> Scenario:
    try:
        parties = []
        for part in text.strip().split(";"):
            s, o = part.split(",")
            parties.append((int(s), int(o)))
        return Scenario(tuple(parties))
    except (ValueError, TypeError) as exc:
        raise ScenarioError(f"bad scenario {text!r}: {exc}") from None


def _ints(text: str) -> tuple[int, ...]:
    return tuple(int(v) for v in text.split(","))


def _blocks(text: str):
    """Split into (first line number, lines) chunks at separators."""
    chunk, start = [], 1
    for no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if line == SEPARATOR:
            yield start, chunk
            chunk, start = [], no + 1
            continue
        chunk.append((no, line))
    yield start, chunk


def _header(lines, start):
    body = [(no, l) for no, l in lines if l and not l.startswith("#")]
    if not body:
        raise ParseError(start, "empty block")
    no, first = body[0]
    if not first.startswith("scenario:"):
        raise ParseError(no, "expected 'scenario: ...' header")
    try:
        sc = parse_scenario(first.split(":", 1)[1])
    except ScenarioError as exc:
        raise ParseError(no, str(exc)) from None
    return no, sc, body[1:]


def _parse_behavior_block(lines, start) -> Behavior:
    hno, sc, body = _header(lines, start)
    table = [Fraction(0)] * sc.table_size
    seen = set()
    for no, line in body:
        m = _ENTRY.match(line)
        if not m:
            raise ParseError(no, f"malformed entry {line!r}")
        try:
            idx = sc.row_index(_ints(m["s"]), _ints(m["o"]))
            p = Fraction(m["p"])
        except (ScenarioError, ValueError, ZeroDivisionError, IndexError) as exc:
            raise ParseError(no, str(exc)) from None
        if idx in seen:
            raise ParseError(no, "duplicate entry")
        seen.add(idx)
        table[idx] = p
    try:
        return Behavior(sc, tuple(table))
    except NormalizationError as exc:
        raise ParseError(hno, f"not normalized: {exc}") from None


def parse_behaviors(text: str) -> list[Behavior]:
    return [_parse_behavior_block(lines, start) for start, lines in _blocks(text)]


def parse_behavior(text: str) -> Behavior:
    out = parse_behaviors(text)
    if len(out) != 1:
        raise ParseError(1, f"expected one behavior, found {len(out)}")
    return out[0]


def format_behavior(behavior: Behavior, include_zeros: bool = False) -> str:
    sc = behavior.scenario
    lines = [f"scenario: {sc.label()}"]
    for s in sc.joint_settings:
        for o in sc.joint_outcomes:
            p = behavior.prob(s, o)
            if p or include_zeros:
                lines.append(
                    f"settings={','.join(map(str, s))} "
                    f"outcomes={','.join(map(str, o))} p={fmt(p)}"
                )
    return "\n".join(lines) + "\n"


def format_behaviors(behaviors) -> str:
    return f"{SEPARATOR}\n".join(format_behavior(b) for b in behaviors)


def format_jqpd(jqpd: QuasiDistribution) -> str:
    """Nonzero atom weights; an atom lists each party's outcomes per setting."""
    sc = jqpd.scenario
    lines = [f"scenario: {sc.label()}"]
    for i, v in enumerate(jqpd.values):
        if v:
            atom = ";".join(",".join(map(str, d)) for d in atom_assignment(sc, i))
            lines.append(f"atom={atom} p={fmt(v)}")
    return "\n".join(lines) + "\n"


def parse_jqpd(text: str) -> QuasiDistribution:
    from .scenario import atom_index

    blocks = list(_blocks(text))
    if len(blocks) != 1:
        raise ParseError(1, "expected one quasi-distribution")
    start, lines = blocks[0]
    hno, sc, body = _header(lines, start)
    values = [Fraction(0)] * sc.atom_count
    for no, line in body:
        m = _ATOM.match(line)
        if not m:
            raise ParseError(no, f"malformed atom line {line!r}")
        try:
            idx = atom_index(sc, [_ints(p) for p in m["a"].split(";")])
            values[idx] = Fraction(m["p"])
        except (ScenarioError, ValueError, ZeroDivisionError) as exc:
            raise ParseError(no, str(exc)) from None
    try:
        return QuasiDistribution(sc, tuple(values))
    except NormalizationError as exc:
        raise ParseError(hno, str(exc)) from None


def read_behavior(path) -> Behavior:
    return parse_behavior(Path(path).read_text())


def write_text(path, text: str):
    Path(path).write_text(text)
