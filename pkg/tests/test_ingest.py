import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from contract_debt.catalog import default_catalog
from contract_debt.ingest import (
    Confidence,
    Finding,
    FindingsError,
    merge_manual,
    merge_overlapping,
    normalize,
    parse_findings,
)


def rec(**over):
    r = {"tool": "slither", "tool_code": "suicidal", "contract": "SimpleToken",
         "file": "SimpleToken.sol", "line_start": 40, "line_end": 44}
    r.update(over)
    return r


def test_parse_one_record():
    [f] = parse_findings(json.dumps([rec(confidence="High", message="kill path")]))
    assert f == Finding("slither", "SimpleToken", "suicidal", "SimpleToken.sol", 40, 44,
                        confidence=Confidence.High, message="kill path")


def test_parse_empty():
    assert parse_findings("[]") == []
    assert parse_findings("") == []


def test_missing_tool_reports_index():
    r = rec()
    del r["tool"]
    with pytest.raises(FindingsError) as e:
        parse_findings([r])
    assert e.value.index == 0


@pytest.mark.parametrize("bad", [
    rec(line_start=5, line_end=4),
    rec(line_start=0),
    rec(line_start="3"),
    rec(extra=1),
    rec(confidence="Sure"),
    rec(tool_code=None),
    rec(tool=""),
])
def test_malformed_records(bad):
    with pytest.raises(FindingsError) as e:
        parse_findings([rec(), bad])
    assert e.value.index == 1


def test_not_an_array():
    with pytest.raises(FindingsError):
        parse_findings('{"tool": "x"}')
    with pytest.raises(FindingsError):
        parse_findings("[not json")


def test_order_preserved_and_tool_lowercased():
    fs = parse_findings([rec(line_start=9, line_end=9), rec(tool="Mythril", tool_code="SWC-106")])
    assert [f.line_start for f in fs] == [9, 40]
    assert fs[1].tool == "mythril"


def test_overlap_merge(catalog):
    fs = parse_findings([
        rec(tool="slither", line_start=10, line_end=12),
        rec(tool="mythril", tool_code="SWC-106", line_start=11, line_end=13),
    ])
    out, unmapped = normalize(fs, catalog)
    assert unmapped == []
    [nf] = out
    assert nf.reporting_tools == ("mythril", "slither")
    assert (nf.line_start, nf.line_end) == (10, 13)
    assert nf.cwe_ids == (28,)
    assert nf.merged_count == 2


def test_disjoint_ranges_stay_separate(catalog):
    fs = parse_findings([rec(line_start=1, line_end=2), rec(line_start=5, line_end=6)])
    assert len(normalize(fs, catalog)[0]) == 2


def test_transitive_overlap(catalog):
    fs = parse_findings([rec(line_start=1, line_end=3), rec(line_start=3, line_end=5),
                         rec(line_start=5, line_end=9)])
    [nf] = normalize(fs, catalog)[0]
    assert (nf.line_start, nf.line_end) == (1, 9)


def test_contained_range_does_not_shrink_span(catalog):
    fs = parse_findings([rec(line_start=1, line_end=20), rec(line_start=2, line_end=3),
                         rec(line_start=15, line_end=22)])
    [nf] = normalize(fs, catalog)[0]
    assert (nf.line_start, nf.line_end) == (1, 22)


def test_unmapped(catalog):
    fs = parse_findings([rec(tool_code="naming-convention")])
    out, unmapped = normalize(fs, catalog)
    assert out == [] and unmapped == fs


def test_prefilled_vulnerability_id(catalog):
    fs = parse_findings([rec(tool="custom", tool_code="", vulnerability_id="costly-loop")])
    [nf] = normalize(fs, catalog)[0]
    assert nf.vulnerability_id == "costly-loop"


def test_confidence_keeps_max(catalog):
    fs = parse_findings([rec(confidence="Low"), rec(tool="solhint", tool_code="avoid-suicide", confidence="High")])
    [nf] = normalize(fs, catalog)[0]
    assert nf.confidence is Confidence.High


# ---- manual merge

def manual(**over):
    r = {"tool": "manual", "vulnerability_id": "transaction-ordering-dependency",
         "contract": "FindThisHash", "file": "FindThisHash.sol", "line_start": 6, "line_end": 8}
    r.update(over)
    return r


def test_manual_only(catalog):
    [nf] = merge_manual([], [manual()], catalog)
    assert nf.reporting_tools == ("manual",)
    assert nf.category.value == "FrontRunning"


def test_manual_identity_on_empty(catalog):
    auto, _ = normalize(parse_findings([rec()]), catalog)
    assert merge_manual(auto, [], catalog) == auto
    assert merge_manual(auto, "", catalog) == auto


def test_manual_typo_errors(catalog):
    with pytest.raises(FindingsError, match="front-runing"):
        merge_manual([], [manual(vulnerability_id="front-runing")], catalog)


def test_manual_needs_slug(catalog):
    with pytest.raises(FindingsError):
        merge_manual([], [manual(vulnerability_id=None, tool_code="x")], catalog)


def test_manual_duplicate_adds_manual_tool(catalog):
    auto, _ = normalize(parse_findings([rec()]), catalog)
    [nf] = merge_manual(auto, [manual(vulnerability_id="reachable-selfdestruct", contract="SimpleToken",
                                      file="SimpleToken.sol", line_start=42, line_end=50)], catalog)
    assert nf.reporting_tools == ("manual", "slither")
    assert (nf.line_start, nf.line_end) == (40, 50)


# ---- properties

TOOLS = [("slither", "suicidal"), ("mythril", "SWC-106"), ("solhint", "avoid-suicide"),
         ("slither", "costly-loop"), ("smartcheck", "SOLIDITY_TX_ORIGIN"), ("slither", "naming-convention")]


@st.composite
def findings(draw):
    n = draw(st.integers(0, 25))
    out = []
    for _ in range(n):
        tool, code = draw(st.sampled_from(TOOLS))
        lo = draw(st.integers(1, 40))
        hi = lo + draw(st.integers(0, 6))
        out.append(Finding(tool, draw(st.sampled_from(["A", "B"])), code, "x.sol", lo, hi,
                           confidence=draw(st.sampled_from(list(Confidence)))))
    return out


@settings(max_examples=200)
@given(findings(), st.randoms())
def test_order_independent(fs, rnd):
    c = default_catalog()
    shuffled = list(fs)
    rnd.shuffle(shuffled)
    assert set(normalize(fs, c)[0]) == set(normalize(shuffled, c)[0])


@settings(max_examples=200)
@given(findings())
def test_idempotent_and_lossless(fs):
    c = default_catalog()
    out, unmapped = normalize(fs, c)
    again, unmapped2 = normalize(out, c)
    assert set(again) == set(out) and unmapped2 == []
    assert sum(n.merged_count for n in out) + len(unmapped) == len(fs)
    for n in out:
        assert n.reporting_tools and len(set(n.reporting_tools)) == len(n.reporting_tools)


@settings(max_examples=200)
@given(findings())
def test_merged_records_do_not_overlap(fs):
    out, _ = normalize(fs, default_catalog())
    for a in out:
        for b in out:
            if a is not b and (a.contract_name, a.vulnerability_id) == (b.contract_name, b.vulnerability_id):
                assert a.line_end < b.line_start or b.line_end < a.line_start
    assert merge_overlapping(out) == out
