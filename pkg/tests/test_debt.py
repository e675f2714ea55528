from decimal import Decimal

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from contract_debt.catalog import DesignFlawCategory
from contract_debt.cwss import parse_vector
from contract_debt.debt import (
    AssessConfig,
    Band,
    CalTable,
    ContractProfile,
    DebtError,
    PortfolioEntry,
    Severity,
    Thresholds,
    assess,
    band_cost,
    band_value,
    cal_score,
    cls_score,
    interest,
    portfolio_cost_thresholds,
    round1,
    severity,
)
from contract_debt.evmgas import ContractBytecode
from contract_debt.ingest import NormalizedFinding

D = Decimal
CEO_VECTOR = "TI:H/AP:A/AL:A/IC:L/FC:T/RP:N/RL:S/AV:I/AS:N/IN:A/SC:M/BI:H/DI:H/EX:H/EC:N/P:C"


# ---- lifespan and activity

@pytest.mark.parametrize("days,score", [
    (1, "0.17"), (100, "0.17"), (266, "0.17"),
    (267, "0.35"), (295, "0.35"), (533, "0.35"),
    (534, "0.5"), (800, "0.5"), (10000, "0.5"),
])
def test_cls_bands(days, score):
    assert cls_score(days) == D(score)


@pytest.mark.parametrize("bad", [0, -5, 1.5, True, "10"])
def test_cls_rejects(bad):
    with pytest.raises(DebtError):
        cls_score(bad)


def test_cls_step_function_exhaustive():
    prev = D(0)
    for d in range(1, 1200):
        s = cls_score(d)
        assert s >= prev
        prev = s
    assert {cls_score(d) for d in range(1, 1200)} == {D("0.17"), D("0.35"), D("0.5")}


def test_cal_scores():
    t = CalTable()
    assert cal_score(t.rank("games")) == 6
    assert cal_score(t.rank("health")) == 1
    assert cal_score("4-6") == 5
    assert [cal_score(r) for r in range(1, 19)] == [6] * 3 + [5] * 3 + [4] * 3 + [3] * 3 + [2] * 3 + [1] * 3
    with pytest.raises(DebtError):
        cal_score("19-21")


def test_cal_custom_table():
    t = CalTable(("a", "b", "c", "d"), {"1-1": D(6), "2-3": D("3.5"), "4-4": D(1)})
    assert cal_score(t.rank("c"), t) == D("3.5")
    with pytest.raises(DebtError):
        CalTable(("a",), {"1-2": D(6), "2-3": D(1)})  # overlap
    with pytest.raises(DebtError):
        CalTable(("a",), {"1-1": D(7)})
    with pytest.raises(DebtError):
        t.rank("zzz")


def test_profile_build():
    p = ContractProfile.build("CEOThrone", "Games", 800, loc=21)
    assert (p.activity_category_rank, p.cal_score, p.cls_score) == (1, 6, D("0.5"))


# ---- interest

def test_interest_examples():
    assert round1(interest(D("76.3"), 6, D("0.5"))) == D("228.9")
    assert round1(interest(100, 6, D("0.5"))) == D("300.0")
    assert interest(0, 3, D("0.35")) == 0


@pytest.mark.parametrize("args", [(101, 6, D("0.5")), (-1, 6, D("0.5")), (50, 7, D("0.5")),
                                  (50, D("0.5"), D("0.5")), (50, 6, D("0.6"))])
def test_interest_range_errors(args):
    with pytest.raises(DebtError):
        interest(*args)


@settings(max_examples=2000)
@given(st.decimals(0, 100, places=5), st.decimals(1, 6, places=2), st.sampled_from(["0.17", "0.35", "0.5"]))
def test_interest_bounds(c, a, l):
    assert 0 <= interest(c, a, D(l)) <= 300


# ---- banding

@pytest.mark.parametrize("v,band", [
    ("0", Band.Low), ("100", Band.Low), ("100.1", Band.Medium), ("150", Band.Medium),
    ("200", Band.Medium), ("200.1", Band.High), ("228.9", Band.High),
])
def test_value_bands(v, band):
    assert band_value(D(v)) is band


def test_cost_bands_absolute():
    t = Thresholds(D("33.33"), D("66.66"))
    assert band_cost(D(51), t) is Band.Medium
    assert band_cost(D("33.33"), t) is Band.Low
    assert band_cost(D(0), t) is Band.Low
    assert band_cost(D("66.67"), t) is Band.High


def test_portfolio_max_thresholds():
    t = portfolio_cost_thresholds(D("100.25"))
    assert abs(t.low - D("33.33")) <= D("0.15") and abs(t.high - D("66.66")) <= D("0.15")
    assert portfolio_cost_thresholds(D(0)) is None
    assert band_cost(D(5), portfolio_max=D(0)) is Band.Low
    assert band_cost(D(90), portfolio_max=D("100.25")) is Band.High
    with pytest.raises(DebtError):
        band_cost(D(1))


def test_thresholds_order():
    with pytest.raises(DebtError):
        Thresholds(D(2), D(1))


@given(st.decimals(0, 10**6, places=4), st.decimals(D("0.001"), 10**6, places=4))
def test_banding_total(x, mx):
    t = portfolio_cost_thresholds(mx)
    assert band_cost(x, t) in set(Band)


# ---- severity matrix

TABLE = {
    ("High", "High"): "Critical", ("High", "Medium"): "High", ("High", "Low"): "Medium",
    ("Medium", "High"): "High", ("Medium", "Medium"): "Medium", ("Medium", "Low"): "Low",
    ("Low", "High"): "Medium", ("Low", "Medium"): "Low", ("Low", "Low"): "Low",
}


@pytest.mark.parametrize("cell", sorted(TABLE))
def test_matrix_cells(cell):
    assert severity(Band(cell[0]), Band(cell[1])) is Severity(TABLE[cell])


def test_matrix_monotone():
    cells = [(c, v) for c in Band for v in Band]
    for c1, v1 in cells:
        for c2, v2 in cells:
            if c1.level <= c2.level and v1.level <= v2.level:
                assert severity(c1, v1).level <= severity(c2, v2).level


# ---- assess

def nf(contract, slug, cat, tools=("slither",), lines=(1, 1)):
    return NormalizedFinding(tools[0], contract, slug, f"{contract}.sol", lines[0], lines[1], slug, cat, (1,), tools)


def ceo_entry():
    return PortfolioEntry(
        profile=ContractProfile.build("CEOThrone", "games", 800, loc=21),
        findings=(nf("CEOThrone", "variable-shadowing", DesignFlawCategory.ImproperInheritance,
                     ("mythos", "securify", "slither", "smartcheck", "solhint")),),
        vectors={"variable-shadowing": parse_vector(CEO_VECTOR)},
        deploy_gas_override=892200,
    )


def test_assess_ceothrone(quote):
    a = assess([ceo_entry()], AssessConfig(), quote)
    [item] = a.items
    assert item.principal.total_gas == 897200
    assert round1(item.interest) == D("228.9")
    assert item.value_band is Band.High and item.vector_source == "user"
    # alone in the portfolio it is its own max, so the cost band is High
    assert item.cost_band is Band.High and item.severity is Severity.Critical


def test_assess_ceothrone_absolute_cost_bands(quote):
    cfg = AssessConfig(cost_thresholds=Thresholds(D("33.33"), D("66.66")))
    [item] = assess([ceo_entry()], cfg, quote).items
    assert item.cost_band is Band.Medium and item.severity is Severity.High


def test_assess_empty(quote):
    a = assess([], AssessConfig(), quote)
    assert a.items == () and a.scatter == () and a.cost_thresholds is None
    assert a.total_gas == 0 and a.max_interest == 0


def test_assess_isolates_failures(quote):
    bad = PortfolioEntry(ContractProfile.build("Broken", "games", 10), load_error="cannot load bytecode")
    nobytes = PortfolioEntry(ContractProfile.build("Empty", "games", 10))
    a = assess([ceo_entry(), bad, nobytes], AssessConfig(), quote)
    assert [e.contract for e in a.errors] == ["Broken", "Empty"]
    assert len(a.contracts) == 1 and len(a.scatter) == 1


def test_assess_suggested_vector(quote):
    e = PortfolioEntry(ContractProfile.build("T", "finance", 300),
                       findings=(nf("T", "integer-overflow-underflow", DesignFlawCategory.ArithmeticIssues),),
                       bytecode=ContractBytecode(runtime_len_override=10))
    [item] = assess([e], AssessConfig(), quote).items
    assert item.vector_source == "suggested"
    assert item.interest == item.cwss.total * item.cal * item.cls


def test_assess_duplicate_names(quote):
    with pytest.raises(DebtError):
        assess([ceo_entry(), ceo_entry()], AssessConfig(), quote)


def _portfolio(n):
    cats = list(DesignFlawCategory)
    out = []
    for i in range(n):
        name = f"C{i:02d}"
        out.append(PortfolioEntry(
            ContractProfile.build(name, CalTable().categories[i % 18], 1 + 97 * i),
            findings=(nf(name, "costly-loop", cats[i % 10]),),
            bytecode=ContractBytecode(runtime_len_override=300 * i),
        ))
    return out


def test_assess_parallel_matches_serial(quote):
    p = _portfolio(12)
    serial = assess(p, AssessConfig(jobs=1), quote)
    parallel = assess(list(reversed(p)), AssessConfig(jobs=4), quote)
    assert serial == parallel
    assert [c.profile.name for c in serial.contracts] == sorted(e.profile.name for e in p)


def test_scatter_one_point_per_contract(quote):
    a = assess(_portfolio(10), AssessConfig(), quote)
    assert len(a.scatter) == len(a.contracts) == 10
    for item in a.items:
        assert item.severity is severity(item.cost_band, item.value_band)
