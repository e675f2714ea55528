"""Debt interest, cost/value banding, severity matrix and portfolio assessment."""

from __future__ import annotations

import enum
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from decimal import ROUND_HALF_UP, Decimal
from typing import Mapping, Sequence

from . import cwss as cwss_mod
from .cwss import CwssScore, CwssVector, WeightTable
from .evmgas import (
    DEFAULT_SCHEDULE,
    ContractBytecode,
    EstimationOptions,
    ExecutionStrategy,
    GasSchedule,
    PrincipalEstimate,
    UpdatePattern,
    principal,
)
from .ingest import Finding, NormalizedFinding
from .pricing import PriceQuote

log = logging.getLogger(__name__)


class DebtError(ValueError):
    pass


# ---------------------------------------------------------------- lifespan / activity

CLS_SHORT, CLS_MEDIUM, CLS_LONG = Decimal("0.17"), Decimal("0.35"), Decimal("0.5")


def cls_score(lifespan_days: int) -> Decimal:
    """Lifespan band score: 1-266 days short, 267-533 medium, 534+ long."""
    if isinstance(lifespan_days, bool) or not isinstance(lifespan_days, int) or lifespan_days < 1:
        raise DebtError(f"lifespan_days must be a positive integer, got {lifespan_days!r}")
    if lifespan_days <= 266:
        return CLS_SHORT
    if lifespan_days <= 533:
        return CLS_MEDIUM
    return CLS_LONG


# DApp categories ordered by activity, most active first
DEFAULT_ACTIVITY_CATEGORIES = (
    "games", "exchanges", "gambling",
    "finance", "high-risk", "marketplaces",
    "development", "social", "media",
    "wallet", "governance", "property",
    "identity", "storage", "security",
    "energy", "insurance", "health",
)
DEFAULT_CAL_BANDS = {"1-3": 6, "4-6": 5, "7-9": 4, "10-12": 3, "13-15": 2, "16-18": 1}


@dataclass(frozen=True)
class CalTable:
    """Ordered activity categories plus rank-band -> score (1..6)."""

    categories: tuple[str, ...] = DEFAULT_ACTIVITY_CATEGORIES
    bands: Mapping[str, Decimal] = field(
        default_factory=lambda: {k: Decimal(v) for k, v in DEFAULT_CAL_BANDS.items()}
    )

    def __post_init__(self):
        spans = []
        for band, value in self.bands.items():
            lo, hi = _band_span(band)
            if not Decimal(1) <= Decimal(value) <= Decimal(6):
                raise DebtError(f"activity band {band}: score {value} outside [1, 6]")
            spans.append((lo, hi))
        spans.sort()
        for (_, hi), (lo, _) in zip(spans, spans[1:]):
            if lo <= hi:
                raise DebtError("activity rank bands overlap")

    def rank(self, category: str) -> int:
        try:
            return self.categories.index(category.lower()) + 1
        except ValueError:
            raise DebtError(f"unknown activity category {category!r}") from None

    def band_for_rank(self, rank: int) -> str:
        for band in self.bands:
            lo, hi = _band_span(band)
            if lo <= rank <= hi:
                return band
        raise DebtError(f"no activity band covers rank {rank}")


def _band_span(band: str) -> tuple[int, int]:
    try:
        lo, _, hi = band.partition("-")
        lo_i, hi_i = int(lo), int(hi or lo)
    except ValueError:
        raise DebtError(f"activity band must look like '4-6', got {band!r}") from None
    if not 1 <= lo_i <= hi_i:
        raise DebtError(f"bad activity band {band!r}")
    return lo_i, hi_i


def cal_score(rank_band: str | int, table: CalTable | None = None) -> Decimal:
    """Activity-level score for a rank band ('1-3') or a 1-based rank."""
    table = table or CalTable()
    band = table.band_for_rank(rank_band) if isinstance(rank_band, int) else rank_band
    if band not in table.bands:
        raise DebtError(f"unknown activity band {rank_band!r}")
    return Decimal(table.bands[band])


@dataclass(frozen=True)
class ContractProfile:
    name: str
    lifespan_days: int
    activity_category: str
    activity_category_rank: int
    cal_score: Decimal
    cls_score: Decimal
    loc: int | None = None

    @classmethod
    def build(cls, name: str, activity_category: str, lifespan_days: int,
              loc: int | None = None, table: CalTable | None = None) -> "ContractProfile":
        table = table or CalTable()
        rank = table.rank(activity_category)
        return cls(
            name=name,
            lifespan_days=lifespan_days,
            activity_category=activity_category.lower(),
            activity_category_rank=rank,
            cal_score=cal_score(rank, table),
            cls_score=cls_score(lifespan_days),
            loc=loc,
        )


# ---------------------------------------------------------------- interest

MAX_INTEREST = Decimal(300)


def interest(cwss_total: Decimal, cal: Decimal, cls: Decimal) -> Decimal:
    """Accumulated interest within the lifespan period: cwss x activity x lifespan."""
    cwss_total, cal, cls = Decimal(cwss_total), Decimal(cal), Decimal(cls)
    if not 0 <= cwss_total <= 100:
        raise DebtError(f"CWSS total {cwss_total} outside [0, 100]")
    if not 1 <= cal <= 6:
        raise DebtError(f"activity score {cal} outside [1, 6]")
    if not 0 <= cls <= Decimal("0.5"):
        raise DebtError(f"lifespan score {cls} outside [0, 0.5]")
    return cwss_total * cal * cls


def round1(x: Decimal) -> Decimal:
    return Decimal(x).quantize(Decimal("0.1"), rounding=ROUND_HALF_UP)


def round2(x: Decimal) -> Decimal:
    return Decimal(x).quantize(Decimal("0.01"), rounding=ROUND_HALF_UP)


# ---------------------------------------------------------------- banding

class Band(enum.Enum):
    Low = "Low"
    Medium = "Medium"
    High = "High"

    @property
    def level(self) -> int:
        return ("Low", "Medium", "High").index(self.value)


class Severity(enum.Enum):
    Low = "Low"
    Medium = "Medium"
    High = "High"
    Critical = "Critical"

    @property
    def level(self) -> int:
        return ("Low", "Medium", "High", "Critical").index(self.value)


@dataclass(frozen=True)
class Thresholds:
    low: Decimal
    high: Decimal

    def __post_init__(self):
        if not self.low < self.high:
            raise DebtError(f"thresholds must satisfy low < high, got {self.low}, {self.high}")


DEFAULT_VALUE_THRESHOLDS = Thresholds(Decimal(100), Decimal(200))


def _band(x: Decimal, t: Thresholds) -> Band:
    # inclusive upper edges: <= low is Low, (low, high] is Medium
    if x <= t.low:
        return Band.Low
    if x <= t.high:
        return Band.Medium
    return Band.High


def band_value(value: Decimal, thresholds: Thresholds = DEFAULT_VALUE_THRESHOLDS) -> Band:
    return _band(Decimal(value), thresholds)


def portfolio_cost_thresholds(max_cost: Decimal) -> Thresholds | None:
    """Tertiles of the portfolio's highest cost, None when that cost is 0.

    The max is first rounded to three significant figures, so a top cost of
    $100.25 gives cut points of $33.33 and $66.67.
    """
    max_cost = Decimal(max_cost)
    if max_cost <= 0:
        return None
    scale = Decimal(f"{max_cost:.3g}") if max_cost >= Decimal("0.001") else max_cost
    scale = Decimal(format(scale, "f"))
    return Thresholds(scale / 3, scale * 2 / 3)


def band_cost(cost_usd: Decimal, thresholds: Thresholds | None = None,
              portfolio_max: Decimal | None = None) -> Band:
    """Band a fiat cost by absolute thresholds or portfolio-max tertiles."""
    if thresholds is None:
        if portfolio_max is None:
            raise DebtError("band_cost needs thresholds or a portfolio max")
        thresholds = portfolio_cost_thresholds(portfolio_max)
        if thresholds is None:
            return Band.Low
    return _band(Decimal(cost_usd), thresholds)


# cost band -> value band -> severity
SEVERITY_MATRIX: Mapping[Band, Mapping[Band, Severity]] = {
    Band.High: {Band.High: Severity.Critical, Band.Medium: Severity.High, Band.Low: Severity.Medium},
    Band.Medium: {Band.High: Severity.High, Band.Medium: Severity.Medium, Band.Low: Severity.Low},
    Band.Low: {Band.High: Severity.Medium, Band.Medium: Severity.Low, Band.Low: Severity.Low},
}


def severity(cost_band: Band, value_band: Band) -> Severity:
    return SEVERITY_MATRIX[cost_band][value_band]


# ---------------------------------------------------------------- assessment

@dataclass(frozen=True)
class PortfolioEntry:
    profile: ContractProfile
    findings: Sequence[NormalizedFinding] = ()
    # vulnerability slug -> user-supplied vector
    vectors: Mapping[str, CwssVector] = field(default_factory=dict)
    bytecode: ContractBytecode | None = None
    deploy_gas_override: int | None = None
    execution_gas: int | None = None
    # set when the entry could not be loaded (bad bytecode file, ...)
    load_error: str | None = None


@dataclass(frozen=True)
class AssessConfig:
    schedule: GasSchedule = DEFAULT_SCHEDULE
    estimation: EstimationOptions = EstimationOptions()
    update: UpdatePattern = UpdatePattern()
    value_thresholds: Thresholds = DEFAULT_VALUE_THRESHOLDS
    # None -> portfolio-max tertiles
    cost_thresholds: Thresholds | None = None
    weights: WeightTable | None = None
    jobs: int = 1


@dataclass(frozen=True)
class DebtItem:
    contract: str
    finding: NormalizedFinding
    cwss: CwssScore
    vector_source: str  # "user" | "suggested"
    cal: Decimal
    cls: Decimal
    interest: Decimal
    principal: PrincipalEstimate
    value_band: Band
    cost_band: Band
    severity: Severity


@dataclass(frozen=True)
class ContractSummary:
    profile: ContractProfile
    principal: PrincipalEstimate
    cost_band: Band
    item_count: int


@dataclass(frozen=True)
class ContractFailure:
    contract: str
    error: str


@dataclass(frozen=True)
class ScatterPoint:
    contract: str
    cost_usd: Decimal
    interest: Decimal
    severity: Severity


@dataclass(frozen=True)
class DebtAssessment:
    name: str
    items: tuple[DebtItem, ...] = ()
    contracts: tuple[ContractSummary, ...] = ()
    errors: tuple[ContractFailure, ...] = ()
    unmapped: tuple[Finding, ...] = ()
    value_thresholds: Thresholds = DEFAULT_VALUE_THRESHOLDS
    cost_thresholds: Thresholds | None = None
    cost_threshold_mode: str = "portfolio-max"
    scatter: tuple[ScatterPoint, ...] = ()
    warnings: tuple[str, ...] = ()

    @property
    def total_gas(self) -> int:
        return sum(c.principal.total_gas for c in self.contracts)

    @property
    def total_fee_eth(self) -> Decimal:
        return sum((c.principal.fee_eth for c in self.contracts), Decimal(0))

    @property
    def total_fee_usd(self) -> Decimal:
        return sum((c.principal.fee_usd for c in self.contracts), Decimal(0))

    @property
    def max_interest(self) -> Decimal:
        return max((i.interest for i in self.items), default=Decimal(0))


def _contract_principal(entry: PortfolioEntry, config: AssessConfig, quote: PriceQuote) -> PrincipalEstimate:
    if entry.load_error:
        raise DebtError(entry.load_error)
    opts = config.estimation
    if entry.execution_gas is not None:
        opts = replace(opts, execution=ExecutionStrategy.provided, provided_execution_gas=entry.execution_gas)
    return principal(entry.bytecode, config.schedule, opts, quote, config.update,
                     deploy_gas_override=entry.deploy_gas_override)


def assess(
    portfolio: Sequence[PortfolioEntry],
    config: AssessConfig,
    quote: PriceQuote,
    name: str = "portfolio",
    unmapped: Sequence[Finding] = (),
) -> DebtAssessment:
    """Principal per contract, interest per finding, bands and severities.

    A contract whose principal cannot be computed is reported in ``errors``;
    the rest of the portfolio is still assessed.
    """
    weights = config.weights or cwss_mod.default_weights()
    entries = sorted(portfolio, key=lambda e: e.profile.name)
    names = [e.profile.name for e in entries]
    if len(set(names)) != len(names):
        raise DebtError("contract names in a portfolio must be unique")

    def run(entry: PortfolioEntry):
        try:
            return entry, _contract_principal(entry, config, quote), None
        except (ValueError, OSError) as exc:
            return entry, None, str(exc)

    if config.jobs > 1 and len(entries) > 1:
        with ThreadPoolExecutor(max_workers=config.jobs) as pool:
            results = list(pool.map(run, entries))
    else:
        results = [run(e) for e in entries]

    ok = [(e, p) for e, p, err in results if err is None]
    errors = tuple(ContractFailure(e.profile.name, err) for e, _, err in results if err is not None)

    if config.cost_thresholds is not None:
        cost_t, mode = config.cost_thresholds, "absolute"
    else:
        cost_t = portfolio_cost_thresholds(max((p.fee_usd for _, p in ok), default=Decimal(0)))
        mode = "portfolio-max"

    def cost_band_of(p: PrincipalEstimate) -> Band:
        return Band.Low if cost_t is None else _band(p.fee_usd, cost_t)

    items: list[DebtItem] = []
    contracts: list[ContractSummary] = []
    scatter: list[ScatterPoint] = []
    warnings: list[str] = list(quote.warnings)
    for entry, p in ok:
        prof = entry.profile
        cband = cost_band_of(p)
        contract_items = []
        for nf in sorted(entry.findings, key=lambda n: (n.vulnerability_id, n.line_start, n.line_end)):
            vector = entry.vectors.get(nf.vulnerability_id)
            source = "user"
            if vector is None:
                vector, source = cwss_mod.suggest_vector(nf, prof), "suggested"
            sc = cwss_mod.score(vector, weights)
            ai = interest(sc.total, prof.cal_score, prof.cls_score)
            vband = band_value(ai, config.value_thresholds)
            contract_items.append(DebtItem(
                contract=prof.name,
                finding=nf,
                cwss=sc,
                vector_source=source,
                cal=prof.cal_score,
                cls=prof.cls_score,
                interest=ai,
                principal=p,
                value_band=vband,
                cost_band=cband,
                severity=severity(cband, vband),
            ))
        items.extend(contract_items)
        contracts.append(ContractSummary(prof, p, cband, len(contract_items)))
        top = max((i.interest for i in contract_items), default=Decimal(0))
        scatter.append(ScatterPoint(prof.name, p.fee_usd, top,
                                    severity(cband, band_value(top, config.value_thresholds))))
        warnings.extend(f"{prof.name}: {w}" for w in p.warnings)

    return DebtAssessment(
        name=name,
        items=tuple(items),
        contracts=tuple(contracts),
        errors=errors,
        unmapped=tuple(unmapped),
        value_thresholds=config.value_thresholds,
        cost_thresholds=cost_t,
        cost_threshold_mode=mode,
        scatter=tuple(scatter),
        warnings=tuple(warnings),
    )
