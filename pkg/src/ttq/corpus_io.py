"""Reading and writing documents and query results.

Documents use a small XML format::

    <document>
      <sentence>
        <node tag="S" name="n1">
          <node tag="NNP" lex="Ram" name="n21" deprel="a:n3"/>
        </node>
      </sentence>
    </document>

``tag``, ``lex`` and ``name`` are reserved; any other attribute is a user
attribute (and possibly a thread).  Results are written either as raw text,
one ``label: value`` line per record, or as XML fragments.

A location of ``-`` means standard input or standard output.
"""

from __future__ import annotations

import io
import sys
import xml.etree.ElementTree as ET
from typing import Iterable, List, Mapping, Optional

from .errors import CorpusIOError, DuplicateNameError, IoSpecError, XmlFormatError
from .iospec import IoSpec, parse_io_spec
from .model import Document, Node, Sentence, base_text
from .transform import ResultRecord

RESERVED = ("tag", "lex", "name")


def _as_spec(spec) -> IoSpec:
    return parse_io_spec(spec) if isinstance(spec, str) else spec


# -- low-level streams ---------------------------------------------------


def _read_bytes(spec: IoSpec, stream=None) -> bytes:
    if stream is None:
        if spec.is_stream:
            stream = sys.stdin.buffer
        else:
            try:
                with open(spec.location, "rb") as fh:
                    return fh.read()
            except OSError as exc:
                raise CorpusIOError(f"cannot read {spec.location}: {exc.strerror}") from exc
    data = stream.read()
    return data if isinstance(data, bytes) else data.encode(spec.codec())


def _write_text(text: str, spec: IoSpec, stream=None):
    data = text.encode(spec.codec(), errors="xmlcharrefreplace")
    if stream is not None:
        if isinstance(stream, io.TextIOBase):
            stream.write(text)
        else:
            stream.write(data)
        return
    if spec.is_stream:
        out = sys.stdout
        if hasattr(out, "buffer"):
            out.flush()
            out.buffer.write(data)
            out.buffer.flush()
        else:
            out.write(text)
        return
    try:
        with open(spec.location, "wb") as fh:
            fh.write(data)
    except OSError as exc:
        raise CorpusIOError(f"cannot write {spec.location}: {exc.strerror}") from exc


# -- documents -----------------------------------------------------------


def _node_from_xml(elem) -> Node:
    if elem.tag != "node":
        raise XmlFormatError(f"expected <node>, found <{elem.tag}>")
    if "tag" not in elem.attrib:
        raise XmlFormatError("<node> without a tag attribute")
    attrs = {}
    if "name" in elem.attrib:
        attrs["name"] = elem.attrib["name"]
    attrs.update((k, v) for k, v in elem.attrib.items() if k not in RESERVED)
    node = Node(elem.attrib["tag"], elem.attrib.get("lex"), attrs)
    for child in elem:
        node.append(_node_from_xml(child))
    return node


def parse_document(text: str, origin: Optional[IoSpec] = None) -> Document:
    try:
        root = ET.fromstring(text)
    except ET.ParseError as exc:
        line, column = exc.position
        raise XmlFormatError(str(exc).split(":")[0], line, column + 1) from None
    if root.tag != "document":
        raise XmlFormatError(f"root element must be <document>, found <{root.tag}>")
    doc = Document(origin=origin)
    for sent in root:
        if sent.tag != "sentence":
            raise XmlFormatError(f"expected <sentence>, found <{sent.tag}>")
        nodes = list(sent)
        if len(nodes) != 1:
            raise XmlFormatError(f"a <sentence> needs exactly one root <node>, found {len(nodes)}")
        doc.add_sentence(_node_from_xml(nodes[0]))
    seen = set()
    for node in doc.iter_nodes():
        name = node.name
        if name:
            if name in seen:
                raise DuplicateNameError(name)
            seen.add(name)
    return doc


def read_document(spec, stream=None) -> Document:
    """Read an XML document from ``spec`` (an IoSpec or its text form)."""
    spec = _as_spec(spec)
    if spec.format != "xml":
        raise IoSpecError(f"documents can only be read from xml sources, not {spec.format}")
    codec = spec.codec()
    data = _read_bytes(spec, stream)
    try:
        text = data.decode(codec)
    except UnicodeDecodeError as exc:
        raise CorpusIOError(f"{spec.location} is not valid {spec.charset}: {exc.reason}") from None
    return parse_document(text, origin=spec)


def _node_element(node: Node):
    attrib = {"tag": node.tag}
    if node.lex is not None:
        attrib["lex"] = node.lex
    if "name" in node.attrs:
        attrib["name"] = node.attrs["name"]
    attrib.update((k, v) for k, v in node.attrs.items() if k not in RESERVED)
    elem = ET.Element("node", attrib)
    for child in node.children:
        elem.append(_node_element(child))
    return elem


def _sentence_element(sentence: Sentence):
    elem = ET.Element("sentence")
    elem.append(_node_element(sentence.root))
    return elem


def _serialize(elem) -> str:
    ET.indent(elem)
    return ET.tostring(elem, encoding="unicode")


def format_document(d: Document) -> str:
    root = ET.Element("document")
    for sentence in d.sentences:
        root.append(_sentence_element(sentence))
    return _serialize(root) + "\n"


def write_document(d: Document, spec, stream=None):
    spec = _as_spec(spec)
    if spec.format != "xml":
        raise IoSpecError(f"documents can only be written as xml, not {spec.format}")
    header = f'<?xml version="1.0" encoding="{spec.charset}"?>\n'
    _write_text(header + format_document(d), spec, stream)


# -- results -------------------------------------------------------------


def render_value(value) -> str:
    """Text of a record value: node and sentence values render as base text."""
    if isinstance(value, (Node, Sentence)):
        text = base_text(value)
    else:
        text = str(value)
    return text.replace("\r", " ").replace("\n", " ")


def format_raw(records: Iterable[ResultRecord]) -> str:
    return "".join(f"{r.label}: {render_value(r.value)}\n" for r in records)


def format_fragments(records: Iterable[ResultRecord]) -> str:
    parts = []
    for record in records:
        if isinstance(record.value, Node):
            elem = _node_element(record.value)
        elif isinstance(record.value, Sentence):
            elem = _sentence_element(record.value)
        else:
            elem = ET.Element("value", {"label": record.label})
            elem.text = str(record.value)
        parts.append(_serialize(elem) + "\n")
    return "".join(parts)


def write_results(records: Iterable[ResultRecord], spec, stream=None) -> int:
    """Write records in the destination's format; return how many were written."""
    spec = _as_spec(spec)
    records = list(records)
    text = format_raw(records) if spec.format == "raw" else format_fragments(records)
    _write_text(text, spec, stream)
    return len(records)


def deliver(
    records: List[ResultRecord],
    docs: Mapping[Optional[str], Document],
    destinations: Iterable[IoSpec],
    mutating: bool,
    stream=None,
) -> List[ResultRecord]:
    """Send a query's output to each destination.

    For a mutating query an xml destination receives the whole transformed
    document (the one named by the destination alias, else the first);
    otherwise destinations receive the records.  Returns the warning
    records that had no raw destination to go to.
    """
    unsent = [r for r in records if r.is_warning]
    for spec in destinations:
        if mutating and spec.format == "xml":
            doc = docs.get(spec.alias) if spec.alias in docs else next(iter(docs.values()))
            write_document(doc, spec, stream)
        else:
            write_results(records, spec, stream)
            if spec.format == "raw":
                unsent = []
    return unsent


__all__ = [
    "deliver",
    "format_document",
    "format_fragments",
    "format_raw",
    "parse_document",
    "read_document",
    "render_value",
    "write_document",
    "write_results",
]
