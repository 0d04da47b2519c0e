"""Line-oriented section files shared by scenarios and fact tables.

::

    # comment
    [model]
    type = 3-(34;18)
    d = 24
    [assume]
    dual_distance_at_least 3 | citation text
    [zero]
    A(5,9) | reason
    [fact]
    forbid_element_order 38 | citation text
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

SECTIONS = ("model", "assume", "zero", "fact")


class FormatError(ValueError):
    pass


@dataclass(frozen=True)
class Entry:
    words: tuple[str, ...]
    citation: str
    line: int


@dataclass
class SectionFile:
    model: dict[str, str] = field(default_factory=dict)
    assume: list[Entry] = field(default_factory=list)
    zero: list[Entry] = field(default_factory=list)
    fact: list[Entry] = field(default_factory=list)
    source: str = "<string>"


def parse_sections(text: str, source: str = "<string>") -> SectionFile:
    out = SectionFile(source=source)
    current: str | None = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            current = line[1:-1].strip().lower()
            if current not in SECTIONS:
                raise FormatError(f"{source}:{lineno}: unknown section [{current}]")
            continue
        if current is None:
            raise FormatError(f"{source}:{lineno}: content before the first section header")
        if current == "model":
            if "=" not in line:
                raise FormatError(f"{source}:{lineno}: expected 'key = value'")
            key, value = (s.strip() for s in line.split("=", 1))
            out.model[key] = value
            continue
        body, sep, cite = line.partition("|")
        if not sep or not cite.strip():
            raise FormatError(f"{source}:{lineno}: every [{current}] line needs a '| citation'")
        words = tuple(body.split())
        if not words:
            raise FormatError(f"{source}:{lineno}: empty entry")
        getattr(out, current).append(Entry(words, cite.strip(), lineno))
    return out


def read_sections(path: str | Path) -> SectionFile:
    p = Path(path)
    return parse_sections(p.read_text(), source=str(p))
