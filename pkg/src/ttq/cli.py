"""Command-line front end: ``ttq -q QUERY --source xml:corpus.xml``.

Runs one query in batch mode or reads queries interactively (``--repl``).
Exit codes: 0 success, 1 query syntax error, 2 input/output error, 3 any
other evaluation or action error.
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

from .corpus_io import deliver, read_document, write_document
from .errors import CorpusIOError, IoSpecError, QuerySyntaxError, TtqError
from .iospec import IoSpec, parse_io_spec
from .model import Document
from .parser import parse_query
from .query import Query
from .transform import CommandRegistry, ResultRecord, execute

EXIT_OK = 0
EXIT_SYNTAX = 1
EXIT_IO = 2
EXIT_RUNTIME = 3

DEFAULT_DEST = IoSpec("raw", "-")
PROMPT = "ttq> "


@dataclass
class CliConfig:
    query_text: Optional[str] = None
    query_file: Optional[str] = None
    sources: List[IoSpec] = field(default_factory=list)
    dest: Optional[IoSpec] = None
    default_thread: Optional[str] = None
    guard_base_text: bool = False
    repl: bool = False


def _io_spec_arg(text):
    try:
        return parse_io_spec(text)
    except IoSpecError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def build_arg_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ttq",
        description="Query and transform threaded-tree corpora.",
    )
    mode = parser.add_mutually_exclusive_group(required=True)
    mode.add_argument("--query", "-q", dest="query_text", help="query text")
    mode.add_argument("--query-file", help="read the query from a file")
    mode.add_argument("--repl", action="store_true", help="interactive session")
    parser.add_argument(
        "--source",
        action="append",
        default=[],
        type=_io_spec_arg,
        metavar="IOSPEC",
        help="source document, e.g. xml:corpus.xml or xml:-/s (repeatable)",
    )
    parser.add_argument(
        "--dest", type=_io_spec_arg, metavar="IOSPEC", help="destination (default raw:-)"
    )
    parser.add_argument(
        "--default-thread",
        default=os.environ.get("TTQ_DEFAULT_THREAD"),
        help="thread type for R and T without a key (env: TTQ_DEFAULT_THREAD)",
    )
    parser.add_argument(
        "--guard-base-text",
        action="store_true",
        help="roll back and fail on any change to a sentence's base text",
    )
    return parser


def config_from_args(argv=None) -> CliConfig:
    args = build_arg_parser().parse_args(argv)
    return CliConfig(
        query_text=args.query_text,
        query_file=args.query_file,
        sources=list(args.source),
        dest=args.dest,
        default_thread=args.default_thread or None,
        guard_base_text=args.guard_base_text,
        repl=args.repl,
    )


def load_sources(specs) -> Dict[Optional[str], Document]:
    """Read each source; the first is the primary document."""
    docs: Dict[Optional[str], Document] = {}
    for spec in specs:
        key = spec.alias
        if key in docs:
            raise IoSpecError(f"source alias {key or '(none)'} given twice")
        docs[key] = read_document(spec)
    return docs


class Session:
    """A corpus in memory plus the settings queries run with."""

    def __init__(self, config: CliConfig, docs=None, registry=None):
        self.config = config
        self.docs: Dict[Optional[str], Document] = dict(docs or {})
        self.registry = registry or CommandRegistry()

    def evaluate(self, text: str) -> Tuple[Query, Dict[Optional[str], Document], List[ResultRecord]]:
        query = parse_query(text)
        if query.sources:
            docs = load_sources(query.sources)
        elif self.docs:
            docs = self.docs
        else:
            raise CorpusIOError("no source document given (use --source or '=:' in the query)")
        records = list(
            execute(
                query,
                docs,
                registry=self.registry,
                guard_base_text=self.config.guard_base_text,
                default_thread=self.config.default_thread,
            )
        )
        return query, docs, records

    def run(self, text: str, err=None) -> None:
        query, docs, records = self.evaluate(text)
        dests = query.destinations or (self.config.dest or DEFAULT_DEST,)
        for record in deliver(records, docs, dests, query.mutates):
            print(f"warning: {record.value}", file=err or sys.stderr)


def _exit_code(exc: BaseException) -> int:
    if isinstance(exc, QuerySyntaxError):
        return EXIT_SYNTAX
    if isinstance(exc, (CorpusIOError, OSError)):
        return EXIT_IO
    return EXIT_RUNTIME


def _report(exc: BaseException, err) -> None:
    kind = "syntax error" if isinstance(exc, QuerySyntaxError) else "error"
    print(f"ttq: {kind}: {exc}", file=err)


def run_cli(config: CliConfig, stdin=None, err=None) -> int:
    err = err or sys.stderr
    if config.repl:
        return repl_loop(config, stdin=stdin, err=err)
    try:
        if config.query_file is not None:
            with open(config.query_file, encoding="utf-8") as fh:
                text = fh.read()
        else:
            text = config.query_text or ""
        session = Session(config)
        query = parse_query(text)
        if not query.sources:
            session.docs = load_sources(config.sources)
        session.run(text, err)
    except (TtqError, OSError) as exc:
        _report(exc, err)
        return _exit_code(exc)
    return EXIT_OK


def _read_entry(stdin, prompt) -> Optional[str]:
    """One logical line; a trailing backslash joins the next physical line."""
    lines = []
    while True:
        if prompt:
            sys.stderr.write(prompt if not lines else "...> ")
            sys.stderr.flush()
        line = stdin.readline()
        if not line:
            return "".join(lines) if lines else None
        line = line.rstrip("\r\n")
        if line.endswith("\\"):
            lines.append(line + "\n")
            continue
        lines.append(line)
        return "".join(lines)


def _meta(session: Session, line: str, err) -> bool:
    """Handle a ``:command``; return False when the session should end."""
    name, _, arg = line[1:].strip().partition(" ")
    arg = arg.strip()
    if name in ("quit", "q", "exit"):
        return False
    if name == "save":
        if not arg:
            raise IoSpecError(":save needs a destination, e.g. :save xml:out.xml")
        spec = parse_io_spec(arg)
        doc = session.docs.get(spec.alias) if spec.alias in session.docs else None
        if doc is None:
            if not session.docs:
                raise CorpusIOError("nothing loaded")
            doc = next(iter(session.docs.values()))
        write_document(doc, spec)
    elif name == "load":
        if not arg:
            raise IoSpecError(":load needs a source, e.g. :load xml:corpus.xml")
        session.docs = load_sources([parse_io_spec(s) for s in arg.split()])
    elif name == "help":
        print(":load IOSPEC...  :save IOSPEC  :quit", file=err)
    else:
        raise TtqError(f"unknown meta-command :{name}")
    return True


def repl_loop(config: CliConfig, stdin=None, err=None) -> int:
    stdin = stdin or sys.stdin
    err = err or sys.stderr
    session = Session(config)
    try:
        session.docs = load_sources(config.sources)
    except (TtqError, OSError) as exc:
        _report(exc, err)
        return _exit_code(exc)
    prompt = PROMPT if getattr(stdin, "isatty", lambda: False)() else None
    while True:
        entry = _read_entry(stdin, prompt)
        if entry is None:
            break
        line = entry.strip()
        if not line:
            continue
        try:
            if line.startswith(":"):
                if not _meta(session, line, err):
                    break
            else:
                session.run(entry, err)
        except (TtqError, OSError) as exc:
            _report(exc, err)
    return EXIT_OK


def main(argv=None) -> int:
    return run_cli(config_from_args(argv))


if __name__ == "__main__":
    sys.exit(main())
