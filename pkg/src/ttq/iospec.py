"""Source and destination descriptions: ``format:location[:charset][/alias]``."""

from __future__ import annotations

import codecs
from dataclasses import dataclass
from typing import Optional

from .errors import IoSpecError

FORMATS = ("xml", "raw")
DEFAULT_CHARSET = "UTF-8"


@dataclass(frozen=True)
class IoSpec:
    format: str
    location: str
    charset: str = DEFAULT_CHARSET
    alias: Optional[str] = None

    def __post_init__(self):
        if self.format not in FORMATS:
            raise IoSpecError(f"unknown format {self.format!r} (use one of {', '.join(FORMATS)})")
        if not self.location:
            raise IoSpecError("empty location")

    def __str__(self):
        text = f"{self.format}:{self.location}:{self.charset}"
        if self.alias:
            text += f"/{self.alias}"
        return text

    @property
    def is_stream(self):
        return self.location == "-"

    def codec(self) -> str:
        try:
            return codecs.lookup(self.charset).name
        except LookupError:
            raise IoSpecError(f"unknown charset {self.charset!r}") from None


def parse_io_spec(text: str) -> IoSpec:
    """Parse ``xml:src.txt:UTF-8/s`` style descriptions.

    The alias normally trails the charset.  Without a charset, a trailing
    ``/name`` counts as an alias only when it follows a file name with an
    extension or the ``-`` stream (``xml:a.xml/s``); otherwise it is part of
    the path.
    """
    text = text.strip()
    fmt, sep, rest = text.partition(":")
    if not sep:
        raise IoSpecError(f"missing ':' in {text!r}")
    location, sep, charset = rest.partition(":")
    alias = None
    if sep:
        charset, slash, alias = charset.partition("/")
        if slash and not alias.isidentifier():
            raise IoSpecError(f"bad alias {alias!r} in {text!r}")
        if not charset:
            raise IoSpecError(f"empty charset in {text!r}")
    else:
        charset = DEFAULT_CHARSET
        head, slash, tail = location.rpartition("/")
        last = head.rsplit("/", 1)[-1]
        if slash and tail.isidentifier() and (head == "-" or "." in last):
            location, alias = head, tail
    return IoSpec(fmt, location, charset, alias or None)
