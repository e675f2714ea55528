"""Render a DebtAssessment as canonical JSON, Markdown and plot-ready CSV.

Renderers only format; every number comes from the assessment. Rounding
happens here and nowhere else: scores 1 dp, fiat 2 dp, ether 9 dp.
"""

from __future__ import annotations

import csv
import io
import json
from decimal import ROUND_HALF_UP, Decimal
from typing import Any

from .debt import DebtAssessment, DebtItem, Thresholds
from .evmgas import PrincipalEstimate

_Q = {n: Decimal(1).scaleb(-n) for n in range(0, 10)}


def fmt(x: Decimal | int, places: int) -> str:
    return format(Decimal(x).quantize(_Q[places], rounding=ROUND_HALF_UP), "f")


def fmt_factor(x: Decimal) -> str:
    """Compact factor display: 6 not 6.0, 0.5 not 0.50."""
    x = Decimal(x)
    if x == x.to_integral_value():
        return str(int(x))
    return format(x.normalize(), "f")


def _thresholds(t: Thresholds | None, places: int) -> dict[str, str] | None:
    if t is None:
        return None
    return {"low": fmt(t.low, places), "high": fmt(t.high, places)}


def principal_dict(p: PrincipalEstimate) -> dict[str, Any]:
    return {
        "deploy_gas": p.deploy_gas,
        "update_gas": p.update_gas,
        "total_gas": p.total_gas,
        "update_pattern": p.update_pattern,
        "breakdown": dict(p.breakdown),
        "execution_lower_bound": p.execution_lower_bound,
        "unknown_opcode_count": p.unknown_opcode_count,
        "fee_eth": fmt(p.fee_eth, 9),
        "fee_usd": fmt(p.fee_usd, 2),
    }


def canonical_json(doc: Any) -> bytes:
    text = json.dumps(doc, sort_keys=True, separators=(",", ":"), ensure_ascii=False)
    return (text + "\n").encode("utf-8")


def _item_dict(i: DebtItem) -> dict[str, Any]:
    f = i.finding
    return {
        "contract": i.contract,
        "vulnerability_id": f.vulnerability_id,
        "category": f.category.value,
        "secondary_categories": [c.value for c in f.secondary_categories],
        "cwe_ids": list(f.cwe_ids),
        "reporting_tools": list(f.reporting_tools),
        "file": f.file,
        "line_start": f.line_start,
        "line_end": f.line_end,
        "confidence": f.confidence.value,
        "cwss": {
            "vector": i.cwss.vector_string,
            "vector_source": i.vector_source,
            "base_subscore": fmt(i.cwss.base_subscore, 1),
            "attack_surface_subscore": fmt(i.cwss.attack_surface_subscore, 4),
            "environmental_subscore": fmt(i.cwss.environmental_subscore, 4),
            "total": fmt(i.cwss.total, 1),
        },
        "cal": fmt_factor(i.cal),
        "cls": fmt_factor(i.cls),
        "interest": fmt(i.interest, 1),
        "value_band": i.value_band.value,
        "cost_band": i.cost_band.value,
        "cost_usd": fmt(i.principal.fee_usd, 2),
        "severity": i.severity.value,
    }


def assessment_dict(a: DebtAssessment) -> dict[str, Any]:
    quote = None
    if a.contracts:
        q = a.contracts[0].principal.quote_used
        quote = {
            "gas_price_gwei": format(q.gas_price_gwei.normalize(), "f"),
            "eth_usd": fmt(q.eth_usd, 2),
            "source": q.source,
        }
        if q.source != "static":
            quote["timestamp"] = q.timestamp.isoformat()
    return {
        "portfolio": a.name,
        "quote": quote,
        "thresholds": {
            "value": _thresholds(a.value_thresholds, 1),
            "cost": _thresholds(a.cost_thresholds, 2),
            "cost_mode": a.cost_threshold_mode,
        },
        "contracts": [
            {
                "contract": c.profile.name,
                "activity_category": c.profile.activity_category,
                "activity_rank": c.profile.activity_category_rank,
                "cal": fmt_factor(c.profile.cal_score),
                "lifespan_days": c.profile.lifespan_days,
                "cls": fmt_factor(c.profile.cls_score),
                "principal": principal_dict(c.principal),
                "cost_band": c.cost_band.value,
                "item_count": c.item_count,
            }
            for c in a.contracts
        ],
        "items": [_item_dict(i) for i in a.items],
        "errors": [{"contract": e.contract, "error": e.error} for e in a.errors],
        "unmapped": [
            {"tool": f.tool, "tool_code": f.tool_code, "contract": f.contract_name,
             "file": f.file, "line_start": f.line_start, "line_end": f.line_end}
            for f in a.unmapped
        ],
        "scatter": [
            {"contract": p.contract, "cost_usd": fmt(p.cost_usd, 2),
             "interest": fmt(p.interest, 1), "severity": p.severity.value}
            for p in a.scatter
        ],
        "totals": {
            "contracts_assessed": len(a.contracts),
            "contracts_failed": len(a.errors),
            "items": len(a.items),
            "total_gas": a.total_gas,
            "total_fee_eth": fmt(a.total_fee_eth, 9),
            "total_fee_usd": fmt(a.total_fee_usd, 2),
            "max_interest": fmt(a.max_interest, 1),
        },
        "warnings": list(a.warnings),
    }


def render_json(a: DebtAssessment) -> bytes:
    return canonical_json(assessment_dict(a))


def _summary_key(i: DebtItem):
    return (-i.severity.level, -i.interest, i.contract, i.finding.vulnerability_id, i.finding.line_start)


def render_markdown(a: DebtAssessment) -> str:
    out: list[str] = [f"# Security debt assessment: {a.name}", ""]
    vt, ct = a.value_thresholds, a.cost_thresholds
    out.append(f"Value bands: Low <= {fmt(vt.low, 1)} < Medium <= {fmt(vt.high, 1)} < High.  ")
    if ct is None:
        out.append("Cost bands: all Low (no non-zero cost in portfolio).")
    else:
        out.append(f"Cost bands ({a.cost_threshold_mode}): Low <= ${fmt(ct.low, 2)} < Medium "
                   f"<= ${fmt(ct.high, 2)} < High.")
    out.append("")

    out += ["## Summary", ""]
    if a.items:
        out += ["| Severity | Contract | Vulnerability | Interest | Cost (USD) |",
                "|---|---|---|---|---|"]
        for i in sorted(a.items, key=_summary_key):
            out.append(f"| {i.severity.value} | {i.contract} | {i.finding.vulnerability_id} | "
                       f"{fmt(i.interest, 1)} | {fmt(i.principal.fee_usd, 2)} |")
    else:
        out.append("No debt items.")
    out.append("")
    out.append(f"Total principal: {a.total_gas} gas, {fmt(a.total_fee_eth, 9)} ETH, "
               f"${fmt(a.total_fee_usd, 2)}. Max interest: {fmt(a.max_interest, 1)}.")
    out.append("")

    by_contract: dict[str, list[DebtItem]] = {}
    for i in a.items:
        by_contract.setdefault(i.contract, []).append(i)
    for c in a.contracts:
        p = c.principal
        out += [f"## {c.profile.name}", ""]
        out.append(f"Activity: {c.profile.activity_category} (rank {c.profile.activity_category_rank}, "
                   f"CAL {fmt_factor(c.profile.cal_score)}). Lifespan: {c.profile.lifespan_days} days "
                   f"(CLS {fmt_factor(c.profile.cls_score)}).")
        out.append("")
        items = by_contract.get(c.profile.name, [])
        if items:
            out += ["| Vulnerability | Category | CWEs | Tools | Lines |", "|---|---|---|---|---|"]
            for i in items:
                f = i.finding
                cats = " / ".join(x.value for x in (f.category,) + f.secondary_categories)
                cwes = ", ".join(f"CWE-{n}" for n in f.cwe_ids)
                out.append(f"| {f.vulnerability_id} | {cats} | {cwes} | {', '.join(f.reporting_tools)} | "
                           f"{f.line_start}-{f.line_end} |")
            out.append("")
        out += ["| Component | Gas |", "|---|---|"]
        for k, v in p.breakdown.items():
            out.append(f"| {k} | {v} |")
        out.append(f"| **total** | **{p.total_gas}** |")
        out.append("")
        note = " (execution is a static lower bound)" if p.execution_lower_bound else ""
        out.append(f"Principal: {p.total_gas} gas = {fmt(p.fee_eth, 9)} ETH = ${fmt(p.fee_usd, 2)}, "
                   f"cost band {c.cost_band.value}{note}.")
        out.append("")
        for i in items:
            out.append(f"- `{i.finding.vulnerability_id}` interest: "
                       f"{fmt(i.cwss.total, 1)} × {fmt_factor(i.cal)} × {fmt_factor(i.cls)} = "
                       f"{fmt(i.interest, 1)} ({i.vector_source} vector `{i.cwss.vector_string}`) "
                       f"**[{i.severity.value}]**")
        if items:
            out.append("")

    if a.unmapped:
        out += ["## Unmapped findings", "", "| Tool | Code | Contract | Lines |", "|---|---|---|---|"]
        for f in a.unmapped:
            out.append(f"| {f.tool} | {f.tool_code} | {f.contract_name} | {f.line_start}-{f.line_end} |")
        out.append("")
    if a.errors:
        out += ["## Errors", ""]
        out += [f"- {e.contract}: {e.error}" for e in a.errors]
        out.append("")
    if a.warnings:
        out += ["## Warnings", ""]
        out += [f"- {w}" for w in a.warnings]
        out.append("")
    return "\n".join(out)


def render_scatter_csv(a: DebtAssessment) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["contract", "cost_usd", "interest", "severity"])
    for p in a.scatter:
        w.writerow([p.contract, fmt(p.cost_usd, 2), fmt(p.interest, 1), p.severity.value])
    return buf.getvalue()
