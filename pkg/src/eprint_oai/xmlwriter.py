"""Minimal XML writing helpers shared by the crosswalk and protocol layers."""

from __future__ import annotations

XSI_NS = "http://www.w3.org/2000/10/XMLSchema-instance"


def escape(text: str) -> str:
    return (
        text.replace("&", "&amp;")
        .replace("<", "&lt;")
        .replace(">", "&gt;")
        .replace('"', "&quot;")
    )


def element(name: str, text: str, indent: str = "") -> str:
    return f"{indent}<{name}>{escape(text)}</{name}>"


def open_tag(name: str, namespace: str, schema: str, indent: str = "") -> str:
    """Opening tag with default namespace, xsi namespace and schemaLocation."""
    pad = indent + "  "
    return (
        f'{indent}<{name} xmlns="{namespace}"\n'
        f'{pad}xmlns:xsi="{XSI_NS}"\n'
        f'{pad}xsi:schemaLocation="{namespace}\n'
        f'{pad}                    {schema}">'
    )
