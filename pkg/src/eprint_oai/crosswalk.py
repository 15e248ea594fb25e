"""Conversion of native metadata to the disseminable formats.

Four formats are registered by default:

- ``oai_dc``      Dublin Core in XML
- ``oai_rfc1807`` RFC1807 bibliographic records in XML
- ``arXiv``       structured XML rendering of the native metadata
- ``arXivOld``    verbatim XML encoding of the native fields

Every format renders to an XML fragment exactly as it is embedded in a
GetRecord ``<metadata>`` block. All records convert to all four formats.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from datetime import date
from importlib import resources

from .absfile import InternalMetadata
from .authors import AuthorName, display_name, parse_authors
from .ids import TaxonomyConfig, format_datestamp
from .texmap import tex_to_utf8
from .xmlwriter import element, open_tag

DEFAULT_ABS_URL_PREFIX = "http://arXiv.org/abs/"


class UnsupportedFormat(ValueError):
    """Requested metadataPrefix is not registered."""


@dataclass(frozen=True)
class FormatDescriptor:
    prefix: str
    schema: str
    namespace: str

    def __post_init__(self):
        # "_" is the resumptionToken field separator; only the oai_ family
        # prefix may contain it (the tag strips that part off)
        if "_" in self.prefix and not self.prefix.startswith("oai_"):
            raise ValueError(f"metadataPrefix may not contain '_': {self.prefix!r}")

    @property
    def token_tag(self) -> str:
        """Short form used inside resumptionTokens (oai_dc -> dc)."""
        return self.prefix.removeprefix("oai_")


# registration order is the order ListMetadataFormats reports
DEFAULT_FORMATS: tuple[FormatDescriptor, ...] = (
    FormatDescriptor(
        "arXivOld", "http://arXiv.org/OAI/arXivOld.xsd", "http://arXiv.org/OAI/"
    ),
    FormatDescriptor(
        "arXiv", "http://arXiv.org/OAI/arXiv.xsd", "http://arXiv.org/OAI/"
    ),
    FormatDescriptor(
        "oai_rfc1807",
        "http://www.openarchives.org/OAI/rfc1807.xsd",
        "http://info.internet.isi.edu:80/in-notes/rfc/files/rfc1807.txt",
    ),
    FormatDescriptor(
        "oai_dc", "http://www.openarchives.org/OAI/dc.xsd",
        "http://purl.org/dc/elements/1.1/",
    ),
)


def find_format(
    prefix: str, formats: tuple[FormatDescriptor, ...] = DEFAULT_FORMATS
) -> FormatDescriptor:
    for f in formats:
        if f.prefix == prefix:
            return f
    raise UnsupportedFormat(prefix)


def format_for_token_tag(
    tag: str, formats: tuple[FormatDescriptor, ...] = DEFAULT_FORMATS
) -> FormatDescriptor:
    for f in formats:
        if f.token_tag == tag:
            return f
    raise UnsupportedFormat(tag)


# --- language detection -----------------------------------------------------

_LANGUAGE_TABLE: dict[str, str] | None = None


def load_languages(path=None) -> dict[str, str]:
    if path is None:
        text = resources.files("eprint_oai.data").joinpath("languages.tsv").read_text()
    else:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    table = {}
    for line in text.splitlines():
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        name, code = line.split("\t")
        table[name.lower()] = code
    return table


def detect_language(
    comments: str | None, table: dict[str, str] | None = None
) -> str | None:
    """Find an "in <Language>" declaration in a comments field and return
    the ISO-639 code, or None."""
    if not comments:
        return None
    if table is None:
        global _LANGUAGE_TABLE
        if _LANGUAGE_TABLE is None:
            _LANGUAGE_TABLE = load_languages()
        table = _LANGUAGE_TABLE
    for m in re.finditer(r"\b[Ii]n\s+([A-Z][a-z]+)", comments):
        code = table.get(m.group(1).lower())
        if code is not None:
            return code
    return None


# --- format records ----------------------------------------------------------


@dataclass(frozen=True)
class DublinCoreRecord:
    title: str
    creators: tuple[str, ...]
    subjects: tuple[str, ...]
    descriptions: tuple[str, ...]
    date: date
    identifier: str
    type: str = "e-print"

    def __post_init__(self):
        if not (self.title and self.creators and self.identifier):
            raise ValueError("dc record needs title, creators and identifier")


@dataclass(frozen=True)
class Rfc1807Record:
    bib_version: str
    id: str
    entry: date
    title: str
    authors: tuple[str, ...]
    abstract: str
    date: date
    language: str | None = None
    other: tuple[tuple[str, str], ...] = field(default_factory=tuple)


def _clean(text: str) -> str:
    return tex_to_utf8(text)


def _authors(meta: InternalMetadata) -> list[AuthorName]:
    return parse_authors(_clean(meta.authors_raw))


def dc_record(
    meta: InternalMetadata,
    datestamp: date,
    taxonomy: TaxonomyConfig,
    abs_url_prefix: str = DEFAULT_ABS_URL_PREFIX,
) -> DublinCoreRecord:
    descriptions = [_clean(meta.abstract)]
    if meta.comments:
        descriptions.append("Comment: " + _clean(meta.comments))
    return DublinCoreRecord(
        title=_clean(meta.title),
        creators=tuple(display_name(a) for a in _authors(meta)),
        subjects=(taxonomy.subject_name(meta.id.archive, meta.id.subject_class),),
        descriptions=tuple(descriptions),
        date=datestamp,
        identifier=abs_url_prefix + meta.id.local(),
    )


def rfc1807_record(
    meta: InternalMetadata, datestamp: date, taxonomy: TaxonomyConfig
) -> Rfc1807Record:
    other = []
    if meta.journal_ref:
        other.append(("other_access", _clean(meta.journal_ref)))
    if meta.report_no:
        other.append(("report", _clean(meta.report_no)))
    return Rfc1807Record(
        bib_version="CS-TR-v2.1",
        id=meta.id.local(),
        entry=datestamp,
        title=_clean(meta.title),
        authors=tuple(display_name(a) for a in _authors(meta)),
        abstract=_clean(meta.abstract),
        date=meta.submission_dates[0][1],
        language=detect_language(meta.comments),
        other=tuple(other),
    )


# --- XML rendering -----------------------------------------------------------


def _render_dc(rec: DublinCoreRecord, fmt: FormatDescriptor) -> str:
    lines = [open_tag("oai_dc", fmt.namespace, fmt.schema)]
    lines.append(element("title", rec.title, " "))
    for creator in rec.creators:
        lines.append(element("creator", creator, " "))
    for subject in rec.subjects:
        lines.append(element("subject", subject, " "))
    for desc in rec.descriptions:
        lines.append(element("description", desc, " "))
    lines.append(element("date", format_datestamp(rec.date), " "))
    lines.append(element("type", rec.type, " "))
    lines.append(element("identifier", rec.identifier, " "))
    lines.append("</oai_dc>")
    return "\n".join(lines)


def _render_rfc1807(rec: Rfc1807Record, fmt: FormatDescriptor) -> str:
    lines = [open_tag("oai_rfc1807", fmt.namespace, fmt.schema)]
    lines.append(element("bib-version", rec.bib_version, " "))
    lines.append(element("id", rec.id, " "))
    lines.append(element("entry", format_datestamp(rec.entry), " "))
    lines.append(element("title", rec.title, " "))
    for author in rec.authors:
        lines.append(element("author", author, " "))
    lines.append(element("date", format_datestamp(rec.date), " "))
    lines.append(element("abstract", rec.abstract, " "))
    if rec.language:
        lines.append(element("language", rec.language, " "))
    for key, value in rec.other:
        lines.append(element(key, value, " "))
    lines.append("</oai_rfc1807>")
    return "\n".join(lines)


def _render_arxiv(
    meta: InternalMetadata, datestamp: date, fmt: FormatDescriptor
) -> str:
    """Structured test-bed format: parsed authors and per-version dates."""
    lines = [open_tag("arXiv", fmt.namespace, fmt.schema)]
    lines.append(element("id", meta.id.local(), " "))
    lines.append(element("title", _clean(meta.title), " "))
    lines.append(" <authors>")
    for a in _authors(meta):
        lines.append("  <author>")
        lines.append(element("keyname", a.keyname, "   "))
        if a.forenames:
            lines.append(element("forenames", a.forenames, "   "))
        if a.prefix:
            lines.append(element("prefix", a.prefix, "   "))
        if a.suffix:
            lines.append(element("suffix", a.suffix, "   "))
        if a.affiliation:
            lines.append(element("affiliation", a.affiliation, "   "))
        lines.append("  </author>")
    lines.append(" </authors>")
    primary = meta.id.local().split("/")[0]
    lines.append(element("primary-category", primary, " "))
    for ref in meta.crosslists:
        lines.append(element("cross-list", ref, " "))
    if meta.comments:
        lines.append(element("comments", _clean(meta.comments), " "))
    if meta.journal_ref:
        lines.append(element("journal-ref", _clean(meta.journal_ref), " "))
    if meta.report_no:
        lines.append(element("report-no", _clean(meta.report_no), " "))
    if meta.license:
        lines.append(element("license", meta.license, " "))
    lines.append(element("abstract", _clean(meta.abstract), " "))
    for ver, d in meta.submission_dates:
        lines.append(
            f' <version number="{ver}"><date>{format_datestamp(d)}</date></version>'
        )
    lines.append(element("datestamp", format_datestamp(datestamp), " "))
    lines.append("</arXiv>")
    return "\n".join(lines)


def _render_arxiv_old(
    meta: InternalMetadata, datestamp: date, fmt: FormatDescriptor
) -> str:
    """Verbatim rendering: native field values untouched, TeX included."""
    lines = [open_tag("arXivOld", fmt.namespace, fmt.schema)]
    lines.append(element("paper", meta.id.local(), " "))
    for ver, d in meta.submission_dates:
        key = "date" if ver == 1 else f"date-v{ver}"
        lines.append(element(key, format_datestamp(d), " "))
    lines.append(element("title", meta.title, " "))
    lines.append(element("authors", meta.authors_raw, " "))
    if meta.comments:
        lines.append(element("comments", meta.comments, " "))
    if meta.report_no:
        lines.append(element("report-no", meta.report_no, " "))
    if meta.journal_ref:
        lines.append(element("journal-ref", meta.journal_ref, " "))
    if meta.crosslists:
        lines.append(element("subj-class", ", ".join(meta.crosslists), " "))
    if meta.license:
        lines.append(element("license", meta.license, " "))
    lines.append(element("abstract", meta.abstract, " "))
    lines.append("</arXivOld>")
    return "\n".join(lines)


def to_format(
    meta: InternalMetadata,
    datestamp: date,
    prefix: str,
    taxonomy: TaxonomyConfig,
    formats: tuple[FormatDescriptor, ...] = DEFAULT_FORMATS,
    abs_url_prefix: str = DEFAULT_ABS_URL_PREFIX,
) -> str:
    """Render one record's metadata payload in the requested format.

    Returns the XML fragment exactly as GetRecord embeds it inside
    ``<metadata>``. Raises :class:`UnsupportedFormat` for unregistered
    prefixes.
    """
    fmt = find_format(prefix, formats)
    if prefix == "oai_dc":
        return _render_dc(dc_record(meta, datestamp, taxonomy, abs_url_prefix), fmt)
    if prefix == "oai_rfc1807":
        return _render_rfc1807(rfc1807_record(meta, datestamp, taxonomy), fmt)
    if prefix == "arXiv":
        return _render_arxiv(meta, datestamp, fmt)
    if prefix == "arXivOld":
        return _render_arxiv_old(meta, datestamp, fmt)
    raise UnsupportedFormat(prefix)
