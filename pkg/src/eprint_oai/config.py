"""Repository identity and policy configuration."""

from __future__ import annotations

import json
from dataclasses import dataclass, field, fields


@dataclass(frozen=True)
class PolicyText:
    text: str
    url: str | None = None


@dataclass(frozen=True)
class EprintsDescription:
    """The e-print community description container for Identify."""

    content: str
    metadata_policy: PolicyText
    data_policy: PolicyText
    submission_policy: PolicyText


@dataclass(frozen=True)
class RepositoryConfig:
    repository_name: str = "arXiv"
    base_url: str = "http://arXiv.org/oai1"
    admin_email: str = "local-admin@xxx.lanl.gov"
    protocol_version: str = "1.0"
    # oai-identifier description container
    scheme: str = "oai"
    repository_identifier: str = "arXiv"
    delimiter: str = ":"
    sample_identifier: str = "oai:arXiv:quant-ph/9901001"
    eprints: EprintsDescription | None = field(
        default_factory=lambda: EprintsDescription(
            content="Author self-archived e-prints",
            metadata_policy=PolicyText(
                "Metadata harvesting permitted through OAI interface",
                "http://arXiv.org/help/oa/metadataPolicy",
            ),
            data_policy=PolicyText(
                "Full-content harvesting not permitted "
                "(except by special arrangement)",
                "http://arXiv.org/help/oa/dataPolicy",
            ),
            submission_policy=PolicyText(
                "Author self-submission preferred, submissions screened "
                "for appropriateness",
                "http://arXiv.org/help/submit",
            ),
        )
    )
    abs_url_prefix: str = "http://arXiv.org/abs/"
    page_size: int = 500

    def __post_init__(self):
        for name in (
            "repository_name",
            "base_url",
            "admin_email",
            "protocol_version",
            "scheme",
            "repository_identifier",
            "delimiter",
            "sample_identifier",
        ):
            if not getattr(self, name):
                raise ValueError(f"Identify-mandatory config field empty: {name}")
        if self.page_size < 1:
            raise ValueError("page_size must be positive")


def load_repository_config(path) -> RepositoryConfig:
    """Load identity config from a JSON file; missing keys take defaults."""
    with open(path, encoding="utf-8") as fh:
        raw = json.load(fh)
    eprints = raw.pop("eprints", "default")
    known = {f.name for f in fields(RepositoryConfig)} - {"eprints"}
    unknown = set(raw) - known
    if unknown:
        raise ValueError(f"unknown config keys: {sorted(unknown)}")
    kwargs = dict(raw)
    if eprints is None:
        kwargs["eprints"] = None
    elif eprints != "default":
        kwargs["eprints"] = EprintsDescription(
            content=eprints["content"],
            metadata_policy=PolicyText(**eprints["metadata_policy"]),
            data_policy=PolicyText(**eprints["data_policy"]),
            submission_policy=PolicyText(**eprints["submission_policy"]),
        )
    return RepositoryConfig(**kwargs)
