"""Hierarchical task specifications parsed from heading-structured text."""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from ..errors import ValidationError

_HEADING = re.compile(r"^(#{1,6})\s+(.*?)\s*$")


@dataclass
class Section:
    title: str
    level: int
    body: str = ""
    children: list["Section"] = field(default_factory=list)
    path: tuple[int, ...] = ()

    def walk(self):
        yield self
        for child in self.children:
            yield from child.walk()

    def leaves(self) -> list["Section"]:
        return [s for s in self.walk() if not s.children]

    def find(self, fragment: str) -> "Section | None":
        frag = fragment.lower()
        for s in self.walk():
            if frag in s.title.lower():
                return s
        return None


@dataclass
class TaskSpec:
    sections: list[Section]
    text: str = ""

    def walk(self):
        for s in self.sections:
            yield from s.walk()

    def _branch(self, fragment: str, description: str) -> Section:
        for s in self.walk():
            if fragment in s.title.lower():
                return s
        raise ValidationError(f"task specification has no {description} branch")

    def domain(self) -> Section:
        return self._branch("domain specification", "domain-specification")

    def procedural(self) -> Section:
        return self._branch("procedural description", "procedural-description")


def _clean_title(raw: str) -> str:
    return raw.replace("**", "").strip()


def parse_spec(text: str) -> TaskSpec:
    """Build the section tree from markdown-style headings (numbering kept verbatim)."""
    if not text or not text.strip():
        raise ValidationError("empty task specification")
    roots: list[Section] = []
    stack: list[Section] = []
    body_lines: list[str] = []

    def flush_body():
        if stack and body_lines:
            stack[-1].body = "\n".join(body_lines).strip()
        body_lines.clear()

    for line in text.splitlines():
        m = _HEADING.match(line)
        if not m:
            body_lines.append(line)
            continue
        flush_body()
        level = len(m.group(1))
        section = Section(title=_clean_title(m.group(2)), level=level)
        while stack and stack[-1].level >= level:
            stack.pop()
        if stack:
            siblings = stack[-1].children
            section.path = (*stack[-1].path, len(siblings))
            siblings.append(section)
        else:
            section.path = (len(roots),)
            roots.append(section)
        stack.append(section)
    flush_body()

    if not roots:
        # heading-free text: a single untitled section
        roots = [Section(title="", level=1, body=text.strip(), path=(0,))]

    def check_unique(children: list[Section]):
        titles = [c.title for c in children]
        dupes = sorted({t for t in titles if titles.count(t) > 1})
        if dupes:
            raise ValidationError(f"duplicate section titles: {dupes}")
        for c in children:
            check_unique(c.children)

    check_unique(roots)
    return TaskSpec(sections=roots, text=text)
