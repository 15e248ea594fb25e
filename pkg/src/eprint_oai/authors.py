"""Untangling of free-format commingled author/affiliation lines.

Author lines look like::

    Fred A Bloggs, Mark Smith II (Univ A), T Sawyer (Univ B)

Names are separated by commas or "and" outside parentheses; parenthesized
groups are affiliations. By convention an affiliation applies backward to
every author listed since the previous affiliation group, so above both
Bloggs and Smith belong to Univ A.

Surname prefixes ("de", "von", ...) and suffixes ("Jr", "III", ...) come
from a small lexicon shipped as a data file.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from importlib import resources


@dataclass(frozen=True)
class AuthorName:
    keyname: str
    forenames: str | None = None
    prefix: str | None = None
    suffix: str | None = None
    affiliation: str | None = None

    def __post_init__(self):
        if not self.keyname:
            raise ValueError("keyname must be non-empty")


@dataclass(frozen=True)
class NameLexicon:
    prefixes: frozenset[str]  # lowercase
    suffixes: frozenset[str]  # as written


def load_lexicon(path=None) -> NameLexicon:
    """Load the prefix/suffix lexicon (tab-separated ``kind<TAB>token``)."""
    if path is None:
        text = (
            resources.files("eprint_oai.data").joinpath("name_lexicon.tsv").read_text()
        )
    else:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    prefixes, suffixes = set(), set()
    for line in text.splitlines():
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        kind, token = line.split("\t")
        if kind == "prefix":
            prefixes.add(token.lower())
        elif kind == "suffix":
            suffixes.add(token)
        else:
            raise ValueError(f"unknown lexicon entry kind {kind!r}")
    return NameLexicon(frozenset(prefixes), frozenset(suffixes))


_DEFAULT_LEXICON: NameLexicon | None = None


def default_lexicon() -> NameLexicon:
    global _DEFAULT_LEXICON
    if _DEFAULT_LEXICON is None:
        _DEFAULT_LEXICON = load_lexicon()
    return _DEFAULT_LEXICON


def _split_top_level(raw: str) -> list[str]:
    """Split on commas and "and" at parenthesis depth 0."""
    segments: list[str] = []
    buf: list[str] = []
    depth = 0
    i = 0
    n = len(raw)
    while i < n:
        ch = raw[i]
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth = max(0, depth - 1)
        if depth == 0:
            if ch == ",":
                segments.append("".join(buf))
                buf = []
                i += 1
                continue
            if raw.startswith("and", i) and (i == 0 or raw[i - 1].isspace()):
                after = i + 3
                if after >= n or raw[after].isspace():
                    segments.append("".join(buf))
                    buf = []
                    i = after
                    continue
        buf.append(ch)
        i += 1
    segments.append("".join(buf))
    return [s.strip() for s in segments if s.strip()]


def _parse_name(text: str, lexicon: NameLexicon) -> AuthorName | None:
    tokens = text.split()
    if not tokens:
        return None
    suffix = None
    if len(tokens) > 1 and tokens[-1].rstrip(".") in lexicon.suffixes:
        suffix = tokens[-1].rstrip(".")
        tokens = tokens[:-1]
    keyname = tokens[-1]
    rest = tokens[:-1]
    # prefix run: lexicon words immediately before the keyname
    prefix_words: list[str] = []
    while rest and rest[-1].lower() in lexicon.prefixes:
        prefix_words.insert(0, rest.pop())
    prefix = " ".join(prefix_words) or None
    forenames = " ".join(rest) or None
    return AuthorName(
        keyname=keyname, forenames=forenames, prefix=prefix, suffix=suffix
    )


def parse_authors(raw: str, lexicon: NameLexicon | None = None) -> list[AuthorName]:
    """Parse an author line into structured names.

    Never raises on odd input; if nothing resembling a name can be
    extracted, the whole stripped line is returned as a single keyname.
    """
    lexicon = lexicon or default_lexicon()
    raw = raw.strip()
    if not raw:
        return []

    authors: list[AuthorName] = []
    unaffiliated: list[int] = []  # indexes awaiting an affiliation group

    for segment in _split_top_level(raw):
        affiliations = re.findall(r"\(([^()]*)\)", segment)
        name_part = re.sub(r"\([^()]*\)", " ", segment).strip()
        if name_part:
            name = _parse_name(name_part, lexicon)
            if name is not None:
                unaffiliated.append(len(authors))
                authors.append(name)
        if affiliations:
            label = ", ".join(a.strip() for a in affiliations if a.strip())
            if label:
                for idx in unaffiliated:
                    a = authors[idx]
                    authors[idx] = AuthorName(
                        keyname=a.keyname,
                        forenames=a.forenames,
                        prefix=a.prefix,
                        suffix=a.suffix,
                        affiliation=label,
                    )
            unaffiliated = []

    if not authors:
        return [AuthorName(keyname=raw)]
    return authors


def display_name(author: AuthorName) -> str:
    """Render as "Keyname, Forenames" with prefix and suffix attached."""
    key = author.keyname
    if author.prefix:
        key = f"{author.prefix} {key}"
    parts = [key]
    if author.forenames:
        parts.append(author.forenames)
    text = ", ".join(parts)
    if author.suffix:
        text += f" {author.suffix}"
    return text
