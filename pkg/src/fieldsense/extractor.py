"""HTML form-control extraction: lenient parsing, label resolution, field signatures."""

from __future__ import annotations

from dataclasses import dataclass
from html.parser import HTMLParser
from pathlib import Path
from urllib.parse import urlsplit

from .errors import FieldsenseError, MalformedUrlError

# Input types that are never autofill targets.
EXCLUDED_INPUT_TYPES = frozenset({"hidden", "submit", "button", "reset", "image"})

# Per the HTML spec, unrecognized type attributes fall back to the text state.
KNOWN_INPUT_TYPES = frozenset(
    {
        "button", "checkbox", "color", "date", "datetime-local", "email",
        "file", "hidden", "image", "month", "number", "password", "radio",
        "range", "reset", "search", "submit", "tel", "text", "time", "url",
        "week",
    }
)

_VOID_ELEMENTS = frozenset(
    {
        "area", "base", "br", "col", "embed", "hr", "img", "input", "link",
        "meta", "param", "source", "track", "wbr",
    }
)

# Opening one of these while the same tag is already open implies closing it.
_SELF_CLOSING_SIBLINGS = frozenset({"p", "li", "option", "optgroup", "tr", "td", "th"})

# Elements whose text reads as part of the surrounding line of text.
_INLINE_TEXT_TAGS = frozenset(
    {
        "a", "abbr", "b", "code", "em", "font", "i", "mark", "small", "span",
        "strong", "sub", "sup", "u",
    }
)

# Subtrees whose text content is never human-visible label text.
_NON_TEXT_TAGS = frozenset({"script", "style", "template"})


@dataclass(frozen=True)
class FieldFeatures:
    """One fillable form control, reduced to its five text channels.

    Form *values* are deliberately absent: nothing here ever carries what a
    user typed, only markup metadata.
    """

    label_text: str
    name: str
    id: str
    control_type: str
    page_url: str


@dataclass(frozen=True)
class FieldSignature:
    """Stable identity of a field across visits: page origin + channel key."""

    origin: str
    key: str


class _Node:
    __slots__ = ("tag", "attrs", "parent", "children")

    def __init__(self, tag: str, attrs: dict[str, str], parent: "_Node | None"):
        self.tag = tag
        self.attrs = attrs
        self.parent = parent
        self.children: list[object] = []  # _Node or str


class _TreeBuilder(HTMLParser):
    """Build a minimal DOM, recovering from malformed markup instead of failing."""

    def __init__(self) -> None:
        super().__init__(convert_charrefs=True)
        self.root = _Node("#document", {}, None)
        self._stack = [self.root]

    def _open(self, tag: str, attrs: list[tuple[str, str | None]]) -> _Node:
        # First occurrence of a duplicated attribute wins, as in browsers.
        attr_map: dict[str, str] = {}
        for k, v in attrs:
            attr_map.setdefault(k.lower(), v if v is not None else "")
        node = _Node(tag, attr_map, self._stack[-1])
        self._stack[-1].children.append(node)
        return node

    def handle_starttag(self, tag: str, attrs: list[tuple[str, str | None]]) -> None:
        tag = tag.lower()
        if tag in _SELF_CLOSING_SIBLINGS and self._stack[-1].tag == tag:
            self._stack.pop()
        node = self._open(tag, attrs)
        if tag not in _VOID_ELEMENTS:
            self._stack.append(node)

    def handle_startendtag(self, tag: str, attrs: list[tuple[str, str | None]]) -> None:
        self._open(tag.lower(), attrs)

    def handle_endtag(self, tag: str) -> None:
        tag = tag.lower()
        for i in range(len(self._stack) - 1, 0, -1):
            if self._stack[i].tag == tag:
                del self._stack[i:]
                return
        # Stray end tag: ignore.

    def handle_data(self, data: str) -> None:
        if data:
            self._stack[-1].children.append(data)


def _iter_elements(node: _Node):
    """Yield element nodes in document (pre-) order."""
    for child in node.children:
        if isinstance(child, _Node):
            yield child
            yield from _iter_elements(child)


def _collapse(text: str) -> str:
    return " ".join(text.split())


def _collect_text(node: _Node, exclude: _Node | None = None) -> str:
    parts: list[str] = []

    def walk(n: _Node) -> None:
        if n is exclude or n.tag in _NON_TEXT_TAGS:
            return
        for child in n.children:
            if isinstance(child, str):
                parts.append(child)
            else:
                walk(child)

    walk(node)
    return _collapse("".join(parts))


def _label_for_map(root: _Node) -> dict[str, _Node]:
    """Map id -> first <label for=id> in document order."""
    mapping: dict[str, _Node] = {}
    for el in _iter_elements(root):
        if el.tag == "label":
            target = el.attrs.get("for", "")
            if target and target not in mapping:
                mapping[target] = el
    return mapping


def _preceding_sibling_text(control: _Node) -> str:
    """Text of the nearest preceding text/inline sibling, stopping at block elements."""
    parent = control.parent
    if parent is None:
        return ""
    idx = parent.children.index(control)
    for sibling in reversed(parent.children[:idx]):
        if isinstance(sibling, str):
            text = _collapse(sibling)
            if text:
                return text
            continue
        if sibling.tag == "br" or sibling.tag in _NON_TEXT_TAGS:
            continue
        if sibling.tag in _INLINE_TEXT_TAGS or sibling.tag == "label":
            text = _collect_text(sibling)
            if text:
                return text
            continue
        break  # block-level sibling: different visual line, stop looking
    return ""


def resolve_label(control: _Node, label_for: dict[str, _Node]) -> str:
    """Resolve the human-visible label for a control.

    Fixed priority: label[for] association, enclosing label (minus the
    control's own text), aria-label, placeholder, nearest preceding inline
    sibling text, then empty.
    """
    control_id = control.attrs.get("id", "")
    if control_id and control_id in label_for:
        text = _collect_text(label_for[control_id])
        if text:
            return text

    ancestor = control.parent
    while ancestor is not None:
        if ancestor.tag == "label":
            text = _collect_text(ancestor, exclude=control)
            if text:
                return text
            break
        ancestor = ancestor.parent

    for attr in ("aria-label", "placeholder"):
        value = _collapse(control.attrs.get(attr, ""))
        if value:
            return value

    return _preceding_sibling_text(control)


def _control_type(el: _Node) -> str | None:
    """Control type for an element, or None if it is not a fillable control."""
    if el.tag == "select":
        return "select"
    if el.tag == "textarea":
        return "textarea"
    if el.tag == "input":
        itype = el.attrs.get("type", "").strip().lower()
        if itype in EXCLUDED_INPUT_TYPES:
            return None
        if itype not in KNOWN_INPUT_TYPES:
            itype = "text"
        return itype
    return None


def _check_page_url(page_url: str) -> None:
    parts = urlsplit(page_url)
    if not parts.scheme or not parts.netloc:
        raise MalformedUrlError(f"not an absolute URL: {page_url!r}")


def parse_document(html: str, page_url: str) -> list[FieldFeatures]:
    """Extract one FieldFeatures per fillable control, in document order.

    HTML is never rejected; arbitrarily malformed markup degrades to
    best-effort recovery. Only the page URL is validated.
    """
    _check_page_url(page_url)
    builder = _TreeBuilder()
    builder.feed(html)
    builder.close()
    root = builder.root
    label_for = _label_for_map(root)

    records: list[FieldFeatures] = []
    for el in _iter_elements(root):
        ctype = _control_type(el)
        if ctype is None:
            continue
        record = FieldFeatures(
            label_text=resolve_label(el, label_for),
            name=el.attrs.get("name", ""),
            id=el.attrs.get("id", ""),
            control_type=ctype,
            page_url=page_url,
        )
        if record.label_text or record.name or record.id:
            records.append(record)
    return records


def signature(f: FieldFeatures) -> FieldSignature:
    """Canonical (origin, name|id|type) identity used by the lookup table."""
    parts = urlsplit(f.page_url)
    if not parts.scheme or not parts.netloc:
        raise MalformedUrlError(f"not an absolute URL: {f.page_url!r}")
    origin = f"{parts.scheme.lower()}://{parts.netloc.lower()}"
    key = f"{f.name}|{f.id}|{f.control_type}".lower()
    return FieldSignature(origin=origin, key=key)


def read_url_map(path: str | Path) -> dict[str, str]:
    """Read a batch-extraction URL map: one `filename<TAB>url` per line."""
    mapping: dict[str, str] = {}
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        if not line.strip():
            continue
        if "\t" not in line:
            raise FieldsenseError(f"{path}:{lineno}: expected filename<TAB>url")
        fname, url = line.split("\t", 1)
        mapping[fname.strip()] = url.strip()
    return mapping
