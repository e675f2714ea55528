"""Scanner and manual findings: parsing, alias resolution and cross-tool dedup."""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, replace
from itertools import groupby
from pathlib import Path
from typing import Any, Iterable, Sequence

from .catalog import Catalog, DesignFlawCategory, lookup, resolve_alias


class FindingsError(ValueError):
    def __init__(self, message: str, index: int | None = None):
        self.index = index
        super().__init__(f"record {index}: {message}" if index is not None else message)


class Confidence(enum.Enum):
    High = "High"
    Medium = "Medium"
    Low = "Low"
    Unknown = "Unknown"

    @property
    def rank(self) -> int:
        return {"Unknown": 0, "Low": 1, "Medium": 2, "High": 3}[self.value]


@dataclass(frozen=True)
class Finding:
    tool: str
    contract_name: str
    tool_code: str
    file: str
    line_start: int
    line_end: int
    vulnerability_id: str | None = None
    confidence: Confidence = Confidence.Unknown
    message: str = ""

    def __post_init__(self):
        if not self.tool:
            raise ValueError("tool must be non-empty")
        if not 1 <= self.line_start <= self.line_end:
            raise ValueError(f"bad line range {self.line_start}-{self.line_end}")


@dataclass(frozen=True)
class NormalizedFinding:
    tool: str
    contract_name: str
    tool_code: str
    file: str
    line_start: int
    line_end: int
    vulnerability_id: str
    category: DesignFlawCategory
    cwe_ids: tuple[int, ...]
    reporting_tools: tuple[str, ...]
    confidence: Confidence = Confidence.Unknown
    message: str = ""
    secondary_categories: tuple[DesignFlawCategory, ...] = ()
    # number of raw findings folded into this record
    merged_count: int = 1

    @property
    def key(self) -> tuple[str, str, int, int]:
        return (self.contract_name, self.vulnerability_id, self.line_start, self.line_end)


_FIELDS = {
    "tool", "tool_code", "vulnerability_id", "contract", "file",
    "line_start", "line_end", "confidence", "message",
}
_REQUIRED = {"tool", "contract", "file", "line_start", "line_end"}


def _parse_record(rec: Any, index: int) -> Finding:
    if not isinstance(rec, dict):
        raise FindingsError("record must be an object", index)
    unknown = set(rec) - _FIELDS
    if unknown:
        raise FindingsError(f"unknown field(s) {sorted(unknown)}", index)
    missing = _REQUIRED - set(rec)
    if missing:
        raise FindingsError(f"missing field(s) {sorted(missing)}", index)
    for name in ("line_start", "line_end"):
        if isinstance(rec[name], bool) or not isinstance(rec[name], int):
            raise FindingsError(f"{name} must be an integer", index)
    if not isinstance(rec["tool"], str) or not rec["tool"]:
        raise FindingsError("tool must be a non-empty string", index)
    if rec.get("vulnerability_id") is None and not rec.get("tool_code"):
        raise FindingsError("either tool_code or vulnerability_id is required", index)
    try:
        confidence = Confidence(rec.get("confidence") or "Unknown")
    except ValueError:
        raise FindingsError(f"bad confidence {rec.get('confidence')!r}", index) from None
    try:
        return Finding(
            tool=rec["tool"].lower(),
            contract_name=str(rec["contract"]),
            tool_code=str(rec.get("tool_code") or ""),
            file=str(rec["file"]),
            line_start=rec["line_start"],
            line_end=rec["line_end"],
            vulnerability_id=rec.get("vulnerability_id"),
            confidence=confidence,
            message=str(rec.get("message") or ""),
        )
    except ValueError as exc:
        raise FindingsError(str(exc), index) from None


def parse_findings(document: str | bytes | list | Path) -> list[Finding]:
    """Parse a findings JSON array (text, bytes, path or decoded list)."""
    if isinstance(document, Path):
        document = document.read_bytes()
    if isinstance(document, (str, bytes)):
        try:
            document = json.loads(document) if document.strip() else []
        except json.JSONDecodeError as exc:
            raise FindingsError(f"invalid JSON: {exc}") from exc
    if not isinstance(document, list):
        raise FindingsError("findings document must be a JSON array")
    return [_parse_record(rec, i) for i, rec in enumerate(document)]


def _resolve(f: Finding | NormalizedFinding, catalog: Catalog) -> NormalizedFinding | None:
    slug = f.vulnerability_id or resolve_alias(catalog, f.tool, f.tool_code)
    vuln = lookup(catalog, slug) if slug else None
    if vuln is None:
        return None
    tools = getattr(f, "reporting_tools", None) or (f.tool,)
    return NormalizedFinding(
        tool=f.tool,
        contract_name=f.contract_name,
        tool_code=f.tool_code,
        file=f.file,
        line_start=f.line_start,
        line_end=f.line_end,
        vulnerability_id=vuln.id,
        category=vuln.category,
        secondary_categories=vuln.secondary_categories,
        cwe_ids=vuln.cwe_ids,
        reporting_tools=tuple(sorted(set(tools))),
        confidence=f.confidence,
        message=f.message,
        merged_count=getattr(f, "merged_count", 1),
    )


def _fold(cluster: list[NormalizedFinding]) -> NormalizedFinding:
    # representative is the first record in a total order, so the fold does
    # not depend on input order
    rep = min(cluster, key=lambda n: (n.line_start, n.tool, n.tool_code, n.line_end, n.file, n.message))
    tools = sorted({t for n in cluster for t in n.reporting_tools})
    return NormalizedFinding(
        tool=tools[0],
        contract_name=rep.contract_name,
        tool_code=rep.tool_code,
        file=rep.file,
        line_start=min(n.line_start for n in cluster),
        line_end=max(n.line_end for n in cluster),
        vulnerability_id=rep.vulnerability_id,
        category=rep.category,
        secondary_categories=rep.secondary_categories,
        cwe_ids=rep.cwe_ids,
        reporting_tools=tuple(tools),
        confidence=max((n.confidence for n in cluster), key=lambda c: c.rank),
        message=rep.message,
        merged_count=sum(n.merged_count for n in cluster),
    )


def merge_overlapping(items: Iterable[NormalizedFinding]) -> list[NormalizedFinding]:
    """Fold records of the same (contract, vulnerability) whose line ranges overlap.

    Overlap is transitive: 1-3, 3-5 and 5-9 collapse into one record 1-9.
    Output is sorted by (contract, vulnerability_id, line_start).
    """
    out: list[NormalizedFinding] = []
    ordered = sorted(items, key=lambda n: (n.contract_name, n.vulnerability_id, n.line_start, n.line_end))
    for _, group in groupby(ordered, key=lambda n: (n.contract_name, n.vulnerability_id)):
        cluster: list[NormalizedFinding] = []
        hi = 0
        for n in group:
            if cluster and n.line_start > hi:
                out.append(_fold(cluster))
                cluster = []
            hi = max(hi, n.line_end) if cluster else n.line_end
            cluster.append(n)
        if cluster:
            out.append(_fold(cluster))
    return out


def normalize(
    findings: Sequence[Finding | NormalizedFinding], catalog: Catalog
) -> tuple[list[NormalizedFinding], list[Finding]]:
    """Resolve findings against the catalog and merge cross-tool duplicates.

    Returns ``(normalized, unmapped)``. Already-normalized records may be fed
    back in; their reporting tools are kept.
    """
    resolved: list[NormalizedFinding] = []
    unmapped: list[Finding] = []
    for f in findings:
        nf = _resolve(f, catalog)
        if nf is None:
            unmapped.append(f)
        else:
            resolved.append(nf)
    return merge_overlapping(resolved), unmapped


def merge_manual(
    auto: Sequence[NormalizedFinding],
    manual_doc: str | bytes | list | Path,
    catalog: Catalog,
) -> list[NormalizedFinding]:
    """Fold manual-analysis findings into the automated ones.

    Manual records must name a catalog slug directly; an unknown slug is an
    error because manual input is authoritative.
    """
    manual = parse_findings(manual_doc)
    if not manual:
        return list(auto)
    extra: list[NormalizedFinding] = []
    for i, f in enumerate(manual):
        if not f.vulnerability_id:
            raise FindingsError("manual findings must carry vulnerability_id", i)
        if lookup(catalog, f.vulnerability_id) is None:
            raise FindingsError(f"unknown vulnerability_id {f.vulnerability_id!r}", i)
        nf = _resolve(f, catalog)
        extra.append(_as_manual(nf))
    return merge_overlapping(list(auto) + extra)


def _as_manual(nf: NormalizedFinding) -> NormalizedFinding:
    return replace(nf, tool="manual", reporting_tools=("manual",))


def load_findings_files(paths: Iterable[Path]) -> list[Finding]:
    findings: list[Finding] = []
    for path in paths:
        try:
            findings.extend(parse_findings(Path(path)))
        except FindingsError as exc:
            raise FindingsError(f"{path}: {exc}") from exc
    return findings
