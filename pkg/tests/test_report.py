import csv
import io
import json
from decimal import Decimal

from hypothesis import given
from hypothesis import strategies as st

from contract_debt.catalog import DesignFlawCategory
from contract_debt.cwss import parse_vector
from contract_debt.debt import AssessConfig, ContractProfile, PortfolioEntry, assess
from contract_debt.evmgas import ContractBytecode
from contract_debt.ingest import Finding, NormalizedFinding
from contract_debt.report import (
    canonical_json,
    fmt,
    fmt_factor,
    render_json,
    render_markdown,
    render_scatter_csv,
)

CEO_VECTOR = "TI:H/AP:A/AL:A/IC:L/FC:T/RP:N/RL:S/AV:I/AS:N/IN:A/SC:M/BI:H/DI:H/EX:H/EC:N/P:C"


def nf(contract, slug, cat, tools=("slither",)):
    return NormalizedFinding(tools[0], contract, slug, f"{contract}.sol", 3, 4, slug, cat, (1,), tools)


def ceo():
    return PortfolioEntry(
        ContractProfile.build("CEOThrone", "games", 800, loc=21),
        findings=(nf("CEOThrone", "variable-shadowing", DesignFlawCategory.ImproperInheritance),),
        vectors={"variable-shadowing": parse_vector(CEO_VECTOR)},
        deploy_gas_override=892200,
    )


def big():
    # larger principal so CEOThrone lands in the Medium cost band
    return PortfolioEntry(
        ContractProfile.build("Big", "games", 900),
        findings=(nf("Big", "variable-shadowing", DesignFlawCategory.ImproperInheritance),),
        vectors={"variable-shadowing": parse_vector(CEO_VECTOR)},
        bytecode=ContractBytecode(runtime_len_override=7666),
    )


def test_fmt():
    assert fmt(Decimal("228.904"), 1) == "228.9"
    assert fmt(Decimal("0.125"), 2) == "0.13"
    assert fmt(5, 2) == "5.00"
    assert fmt(Decimal(0), 9) == "0.000000000" and fmt(Decimal("0E-12"), 2) == "0.00"
    assert (fmt_factor(Decimal(6)), fmt_factor(Decimal("0.50")), fmt_factor(Decimal("0.17"))) == ("6", "0.5", "0.17")


def test_json_item(quote):
    a = assess([ceo(), big()], AssessConfig(), quote)
    doc = json.loads(render_json(a))
    item = next(i for i in doc["items"] if i["contract"] == "CEOThrone")
    assert item["interest"] == "228.9" and item["severity"] == "High"
    assert item["cost_usd"] == "56.52" and item["cal"] == "6" and item["cls"] == "0.5"
    assert item["cwss"]["vector_source"] == "user"
    assert doc["totals"]["items"] == 2 and doc["thresholds"]["cost_mode"] == "portfolio-max"
    assert "timestamp" not in doc["quote"]


def test_json_empty_and_deterministic(quote):
    a = assess([], AssessConfig(), quote)
    doc = json.loads(render_json(a))
    assert doc["items"] == [] and doc["scatter"] == []
    b = assess([ceo(), big()], AssessConfig(jobs=2), quote)
    assert render_json(b) == render_json(assess([big(), ceo()], AssessConfig(), quote))


def test_canonical_json_sorted():
    assert canonical_json({"b": 1, "a": [1, "x"]}) == b'{"a":[1,"x"],"b":1}\n'


@given(st.dictionaries(st.text(max_size=5), st.integers() | st.text(max_size=5), max_size=6))
def test_canonical_json_roundtrip(d):
    out = canonical_json(d)
    assert json.loads(out) == d and canonical_json(json.loads(out)) == out


def test_markdown(quote):
    unmapped = [Finding("slither", "Big", "naming-convention", "Big.sol", 1, 1)]
    a = assess([ceo(), big()], AssessConfig(), quote, unmapped=unmapped)
    md = render_markdown(a)
    assert "76.3 × 6 × 0.5 = 228.9" in md
    assert "## Unmapped findings" in md and "naming-convention" in md
    summary = md.split("## Summary")[1].split("## ")[0]
    assert summary.index("| Critical | Big") < summary.index("| High | CEOThrone")
    assert "## CEOThrone" in md and "| **total** | **897200** |" in md


def test_markdown_empty(quote):
    md = render_markdown(assess([], AssessConfig(), quote))
    assert "No debt items." in md and "all Low" in md


def test_csv(quote):
    assert render_scatter_csv(assess([], AssessConfig(), quote)) == "contract,cost_usd,interest,severity\n"
    entries = [
        PortfolioEntry(ContractProfile.build(f"C{i}", "games", 10 * (i + 1)),
                       findings=(nf(f"C{i}", "costly-loop", DesignFlawCategory.DenialOfService),),
                       bytecode=ContractBytecode(runtime_len_override=100 * i))
        for i in range(10)
    ]
    text = render_scatter_csv(assess(entries, AssessConfig(), quote))
    lines = text.splitlines()
    assert len(lines) == 11
    rows = list(csv.DictReader(io.StringIO(text)))
    for r in rows:
        assert len(r["cost_usd"].split(".")[1]) == 2
        assert len(r["interest"].split(".")[1]) == 1
