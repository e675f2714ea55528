"""Design-vulnerability catalog: categories, CWE mappings and scanner aliases."""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from types import MappingProxyType
from typing import Any, Mapping

import yaml

SLUG_RE = re.compile(r"^[a-z0-9]+(?:-[a-z0-9]+)*$")
SOURCES = ("DASP", "OWASP-10", "OO-design-flaws")


class CatalogError(ValueError):
    """Raised when a catalog document violates the schema or an invariant."""

    def __init__(self, message: str, record_id: str | None = None):
        self.record_id = record_id
        super().__init__(f"{record_id}: {message}" if record_id else message)


class DesignFlawCategory(enum.Enum):
    FrontRunning = "FrontRunning"
    TimeManipulation = "TimeManipulation"
    DenialOfService = "DenialOfService"
    ArithmeticIssues = "ArithmeticIssues"
    BadRandomness = "BadRandomness"
    SensitiveDataExposure = "SensitiveDataExposure"
    KnownVulnerableComponents = "KnownVulnerableComponents"
    BrokenAccessControl = "BrokenAccessControl"
    ImproperInheritance = "ImproperInheritance"
    ModularityViolation = "ModularityViolation"

    @property
    def slug(self) -> str:
        # DenialOfService -> denial-of-service
        return re.sub(r"(?<!^)(?=[A-Z])", "-", self.value).lower()

    @classmethod
    def parse(cls, text: str) -> "DesignFlawCategory":
        """Accept the enum name, its kebab slug, or a spaced title."""
        key = re.sub(r"[^a-z]", "", text.lower())
        for member in cls:
            if member.value.lower() == key:
                return member
        raise ValueError(f"unknown design flaw category: {text!r}")


@dataclass(frozen=True)
class CategoryInfo:
    category: DesignFlawCategory
    source: str
    description: str


@dataclass(frozen=True)
class DesignVulnerability:
    id: str
    name: str
    description: str
    category: DesignFlawCategory
    cwe_ids: tuple[int, ...]
    secondary_categories: tuple[DesignFlawCategory, ...] = ()
    swc_id: int | None = None
    remediation_note: str = ""
    notes: str = ""

    @property
    def categories(self) -> tuple[DesignFlawCategory, ...]:
        return (self.category,) + self.secondary_categories


@dataclass(frozen=True)
class ToolAlias:
    tool: str
    tool_code: str
    vulnerability_id: str


@dataclass(frozen=True)
class Catalog:
    categories: Mapping[DesignFlawCategory, CategoryInfo]
    vulnerabilities: Mapping[str, DesignVulnerability]
    aliases: Mapping[tuple[str, str], str]
    weaknesses: Mapping[int, str] = field(default_factory=lambda: MappingProxyType({}))

    def __len__(self) -> int:
        return len(self.vulnerabilities)

    def __iter__(self):
        return iter(self.vulnerabilities[k] for k in sorted(self.vulnerabilities))

    def weakness_name(self, cwe_id: int) -> str | None:
        return self.weaknesses.get(cwe_id)


_TOP_KEYS = {"categories", "vulnerabilities", "aliases", "weaknesses"}
_CATEGORY_KEYS = {"name", "source", "description"}
_VULN_KEYS = {
    "id", "name", "description", "category", "secondary_categories",
    "cwe_ids", "swc_id", "remediation_note", "notes",
}
_VULN_REQUIRED = {"id", "name", "category", "cwe_ids"}
_ALIAS_KEYS = {"tool", "tool_code", "vulnerability_id"}
_WEAKNESS_KEYS = {"cwe_id", "name"}


def _check_keys(record: Any, allowed: set[str], required: set[str], rid: str | None) -> None:
    if not isinstance(record, dict):
        raise CatalogError("record must be a mapping", rid)
    unknown = set(record) - allowed
    if unknown:
        raise CatalogError(f"unknown field(s) {sorted(unknown)}", rid)
    missing = required - set(record)
    if missing:
        raise CatalogError(f"missing field(s) {sorted(missing)}", rid)


def _positive_int(value: Any, what: str, rid: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int) or value <= 0:
        raise CatalogError(f"{what} must be a positive integer, got {value!r}", rid)
    return value


def _category(value: Any, rid: str) -> DesignFlawCategory:
    try:
        return DesignFlawCategory(value)
    except ValueError:
        raise CatalogError(f"unknown category {value!r}", rid) from None


def build_catalog(doc: Mapping[str, Any] | None) -> Catalog:
    """Validate an already-parsed catalog document and freeze it."""
    doc = doc or {}
    if not isinstance(doc, dict):
        raise CatalogError("catalog document must be a mapping")
    unknown = set(doc) - _TOP_KEYS
    if unknown:
        raise CatalogError(f"unknown top-level field(s) {sorted(unknown)}")

    for key in _TOP_KEYS:
        if not isinstance(doc.get(key) or [], list):
            raise CatalogError(f"{key} must be a list")

    categories: dict[DesignFlawCategory, CategoryInfo] = {}
    for rec in doc.get("categories") or []:
        rid = rec.get("name") if isinstance(rec, dict) else None
        _check_keys(rec, _CATEGORY_KEYS, _CATEGORY_KEYS, rid)
        cat = _category(rec["name"], rid)
        if cat in categories:
            raise CatalogError("duplicate category", rid)
        if rec["source"] not in SOURCES:
            raise CatalogError(f"source must be one of {SOURCES}", rid)
        categories[cat] = CategoryInfo(cat, rec["source"], str(rec["description"]))

    weaknesses: dict[int, str] = {}
    for rec in doc.get("weaknesses") or []:
        rid = f"CWE-{rec.get('cwe_id')}" if isinstance(rec, dict) else None
        _check_keys(rec, _WEAKNESS_KEYS, _WEAKNESS_KEYS, rid)
        cwe = _positive_int(rec["cwe_id"], "cwe_id", rid)
        if cwe in weaknesses:
            raise CatalogError("duplicate weakness", rid)
        weaknesses[cwe] = str(rec["name"])

    vulns: dict[str, DesignVulnerability] = {}
    for rec in doc.get("vulnerabilities") or []:
        rid = rec.get("id") if isinstance(rec, dict) else None
        _check_keys(rec, _VULN_KEYS, _VULN_REQUIRED, rid)
        slug = rec["id"]
        if not isinstance(slug, str) or not SLUG_RE.match(slug):
            raise CatalogError("id must be a lowercase hyphenated slug", str(slug))
        if slug in vulns:
            raise CatalogError("duplicate id", slug)
        cwe_ids = rec["cwe_ids"]
        if not isinstance(cwe_ids, list) or not cwe_ids:
            raise CatalogError("cwe_ids must be a non-empty list", slug)
        swc = rec.get("swc_id")
        primary = _category(rec["category"], slug)
        secondary = tuple(_category(c, slug) for c in rec.get("secondary_categories") or [])
        if primary in secondary or len(set(secondary)) != len(secondary):
            raise CatalogError("secondary categories must be distinct from each other and the primary", slug)
        vulns[slug] = DesignVulnerability(
            id=slug,
            name=str(rec["name"]),
            description=str(rec.get("description") or ""),
            category=primary,
            secondary_categories=secondary,
            cwe_ids=tuple(_positive_int(c, "cwe id", slug) for c in cwe_ids),
            swc_id=None if swc is None else _positive_int(swc, "swc_id", slug),
            remediation_note=str(rec.get("remediation_note") or ""),
            notes=str(rec.get("notes") or ""),
        )

    aliases: dict[tuple[str, str], str] = {}
    for rec in doc.get("aliases") or []:
        rid = f"{rec.get('tool')}:{rec.get('tool_code')}" if isinstance(rec, dict) else None
        _check_keys(rec, _ALIAS_KEYS, _ALIAS_KEYS, rid)
        key = (str(rec["tool"]).lower(), str(rec["tool_code"]))
        if key in aliases:
            raise CatalogError("duplicate alias", rid)
        if rec["vulnerability_id"] not in vulns:
            raise CatalogError(f"alias points at unknown id {rec['vulnerability_id']!r}", rid)
        aliases[key] = rec["vulnerability_id"]

    return Catalog(
        categories=MappingProxyType(categories),
        vulnerabilities=MappingProxyType(vulns),
        aliases=MappingProxyType(aliases),
        weaknesses=MappingProxyType(weaknesses),
    )


def load_catalog(source: str | bytes | Path) -> Catalog:
    """Load a catalog from YAML/JSON text, raw bytes, or a file path."""
    if isinstance(source, Path):
        source = source.read_bytes()
    try:
        doc = yaml.safe_load(source)
    except yaml.YAMLError as exc:
        raise CatalogError(f"unparseable catalog document: {exc}") from exc
    return build_catalog(doc)


_default: Catalog | None = None


def default_catalog() -> Catalog:
    global _default
    if _default is None:
        text = resources.files("contract_debt").joinpath("data/catalog.yaml").read_bytes()
        _default = load_catalog(text)
    return _default


def lookup(catalog: Catalog, slug: str) -> DesignVulnerability | None:
    return catalog.vulnerabilities.get(slug)


def by_category(catalog: Catalog, cat: DesignFlawCategory) -> list[DesignVulnerability]:
    return [v for v in catalog if cat in v.categories]


def by_cwe(catalog: Catalog, cwe_id: int) -> list[DesignVulnerability]:
    return [v for v in catalog if cwe_id in v.cwe_ids]


def resolve_alias(catalog: Catalog, tool: str, tool_code: str) -> str | None:
    """Map a scanner's native detector code to a catalog slug, or None."""
    return catalog.aliases.get((tool.lower(), tool_code))
