"""Query and transform threaded-tree annotated corpora."""

from .corpus_io import read_document, write_document, write_results
from .engine import run_query
from .errors import TtqError
from .iospec import IoSpec, parse_io_spec
from .model import Document, Node, Sentence, base_text, extract_thread_tree
from .parser import format_query, parse_query
from .transform import CommandRegistry, ResultRecord, execute, transform

__version__ = "0.1.0"

__all__ = [
    "CommandRegistry",
    "Document",
    "IoSpec",
    "Node",
    "ResultRecord",
    "Sentence",
    "TtqError",
    "base_text",
    "execute",
    "extract_thread_tree",
    "format_query",
    "parse_io_spec",
    "parse_query",
    "read_document",
    "run_query",
    "transform",
    "write_document",
    "write_results",
]
