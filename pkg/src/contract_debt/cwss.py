"""CWSS targeted-method scoring (0-100) from a 16-factor vector."""

from __future__ import annotations

import re
from dataclasses import dataclass, fields, replace
from decimal import ROUND_HALF_UP, Decimal
from importlib import resources
from pathlib import Path
from types import MappingProxyType
from typing import TYPE_CHECKING, Any, Mapping, Sequence

import yaml

from .catalog import DesignFlawCategory

if TYPE_CHECKING:
    from .debt import ContractProfile
    from .ingest import NormalizedFinding


class CwssError(ValueError):
    pass


# (abbrev, field name, group) in the standard's listing order
FACTORS: tuple[tuple[str, str, str], ...] = (
    ("TI", "technical_impact", "base"),
    ("AP", "acquired_privilege", "base"),
    ("AL", "acquired_privilege_layer", "base"),
    ("IC", "internal_control_effectiveness", "base"),
    ("FC", "finding_confidence", "base"),
    ("RP", "required_privilege", "attack_surface"),
    ("RL", "required_privilege_layer", "attack_surface"),
    ("AV", "access_vector", "attack_surface"),
    ("AS", "authentication_strength", "attack_surface"),
    ("IN", "level_of_interaction", "attack_surface"),
    ("SC", "deployment_scope", "attack_surface"),
    ("BI", "business_impact", "environmental"),
    ("DI", "likelihood_of_discovery", "environmental"),
    ("EX", "likelihood_of_exploit", "environmental"),
    ("EC", "external_control_effectiveness", "environmental"),
    ("P", "prevalence", "environmental"),
)
ABBREV_TO_FIELD = {a: f for a, f, _ in FACTORS}
FIELD_TO_ABBREV = {f: a for a, f, _ in FACTORS}
QUANTIFIED = "Q"

_ZERO, _ONE, _HUNDRED = Decimal(0), Decimal(1), Decimal(100)


@dataclass(frozen=True)
class WeightTable:
    # abbrev -> code -> weight (None for the Quantified code)
    weights: Mapping[str, Mapping[str, Decimal | None]]

    def weight(self, abbrev: str, code: str) -> Decimal | None:
        return self.weights[abbrev][code]

    def codes(self, abbrev: str) -> list[str]:
        return list(self.weights[abbrev])


def _to_decimal(value: Any, where: str) -> Decimal:
    if isinstance(value, bool) or not isinstance(value, (int, float, str, Decimal)):
        raise CwssError(f"{where}: weight must be a number, got {value!r}")
    try:
        d = Decimal(repr(value) if isinstance(value, float) else str(value))
    except ArithmeticError:
        raise CwssError(f"{where}: weight must be a number, got {value!r}") from None
    if not _ZERO <= d <= _ONE:
        raise CwssError(f"{where}: weight {d} outside [0, 1]")
    return d


def load_weights(source: str | bytes | Path | Mapping[str, Any]) -> WeightTable:
    if isinstance(source, Path):
        source = source.read_bytes()
    doc = yaml.safe_load(source) if isinstance(source, (str, bytes)) else source
    if not isinstance(doc, Mapping) or set(doc) != {"factors"}:
        raise CwssError("weight table must be a mapping with a single 'factors' list")
    table: dict[str, Mapping[str, Decimal | None]] = {}
    for rec in doc["factors"] or []:
        if not isinstance(rec, Mapping) or "abbrev" not in rec or "codes" not in rec:
            raise CwssError(f"malformed factor record {rec!r}")
        unknown = set(rec) - {"abbrev", "name", "group", "codes"}
        if unknown:
            raise CwssError(f"factor {rec['abbrev']}: unknown field(s) {sorted(unknown)}")
        abbrev = rec["abbrev"]
        if abbrev not in ABBREV_TO_FIELD:
            raise CwssError(f"unknown factor {abbrev!r}")
        if abbrev in table:
            raise CwssError(f"duplicate factor {abbrev}")
        if rec.get("name", ABBREV_TO_FIELD[abbrev]) != ABBREV_TO_FIELD[abbrev]:
            raise CwssError(f"factor {abbrev}: name must be {ABBREV_TO_FIELD[abbrev]}")
        codes = rec["codes"]
        if not isinstance(codes, Mapping) or not codes:
            raise CwssError(f"factor {abbrev}: codes must be a non-empty mapping")
        table[abbrev] = MappingProxyType({
            str(code): None if (code == QUANTIFIED and w is None)
            else _to_decimal(w, f"{abbrev}:{code}")
            for code, w in codes.items()
        })
    missing = [f"{a} ({f})" for a, f, _ in FACTORS if a not in table]
    if missing:
        raise CwssError(f"weight table missing factor(s): {', '.join(missing)}")
    return WeightTable(MappingProxyType(table))


_default: WeightTable | None = None


def default_weights() -> WeightTable:
    global _default
    if _default is None:
        _default = load_weights(
            resources.files("contract_debt").joinpath("data/cwss_weights.yaml").read_bytes()
        )
    return _default


@dataclass(frozen=True)
class CwssVector:
    """One code per factor; ``Q=<weight>`` codes carry a quantified weight."""

    technical_impact: str = "D"
    acquired_privilege: str = "D"
    acquired_privilege_layer: str = "D"
    internal_control_effectiveness: str = "D"
    finding_confidence: str = "D"
    required_privilege: str = "D"
    required_privilege_layer: str = "D"
    access_vector: str = "D"
    authentication_strength: str = "D"
    level_of_interaction: str = "D"
    deployment_scope: str = "D"
    business_impact: str = "D"
    likelihood_of_discovery: str = "D"
    likelihood_of_exploit: str = "D"
    external_control_effectiveness: str = "D"
    prevalence: str = "D"

    def code(self, abbrev: str) -> str:
        return getattr(self, ABBREV_TO_FIELD[abbrev])

    def with_codes(self, **codes: str) -> "CwssVector":
        """Copy with factors replaced; keys are abbreviations or field names."""
        return replace(self, **{ABBREV_TO_FIELD.get(k, k): v for k, v in codes.items()})


assert len(fields(CwssVector)) == len(FACTORS) == 16


def _split_code(code: str) -> tuple[str, Decimal | None]:
    if code.startswith(QUANTIFIED + "="):
        return QUANTIFIED, _to_decimal(code[2:], "Q")
    return code, None


def resolve(v: CwssVector, w: WeightTable) -> dict[str, Decimal]:
    """Validate ``v`` against ``w`` and return abbrev -> weight."""
    out = {}
    for abbrev, fname, _ in FACTORS:
        raw = getattr(v, fname)
        code, quantified = _split_code(raw)
        if code not in w.weights[abbrev]:
            raise CwssError(f"{abbrev}: unknown code {raw!r}")
        weight = quantified if code == QUANTIFIED else w.weight(abbrev, code)
        if weight is None:
            raise CwssError(f"{abbrev}: quantified code needs a weight, e.g. {abbrev}:Q=0.5")
        out[abbrev] = weight
    return out


@dataclass(frozen=True)
class CwssScore:
    base_subscore: Decimal
    attack_surface_subscore: Decimal
    environmental_subscore: Decimal
    total: Decimal
    vector_string: str

    @property
    def total_rounded(self) -> Decimal:
        return self.total.quantize(Decimal("0.1"), rounding=ROUND_HALF_UP)


def subscores(wt: Mapping[str, Decimal]) -> tuple[Decimal, Decimal, Decimal]:
    """(base, attack surface, environmental) from resolved factor weights."""
    f_ti = _ZERO if wt["TI"] == 0 else _ONE
    base = (10 * wt["TI"] + 5 * (wt["AP"] + wt["AL"]) + 5 * wt["FC"]) * f_ti * wt["IC"] * 4
    attack = (
        20 * (wt["RP"] + wt["RL"] + wt["AV"]) + 20 * wt["SC"] + 15 * wt["IN"] + 5 * wt["AS"]
    ) / 100
    f_bi = _ZERO if wt["BI"] == 0 else _ONE
    env = (10 * wt["BI"] + 3 * wt["DI"] + 4 * wt["EX"] + 3 * wt["P"]) * f_bi * wt["EC"] / 20
    return base, attack, env


def score(v: CwssVector, w: WeightTable | None = None) -> CwssScore:
    w = w or default_weights()
    base, attack, env = subscores(resolve(v, w))
    total = min(max(base * attack * env, _ZERO), _HUNDRED)
    return CwssScore(base, attack, env, total, render_vector(v))


# ---------------------------------------------------------------- vector strings

def render_vector(v: CwssVector) -> str:
    return "/".join(f"{a}:{getattr(v, f)}" for a, f, _ in FACTORS)


_PAIR = re.compile(r"^([A-Z]{1,2}):([A-Z]{1,2}|Q=\d+(?:\.\d+)?)$")


def parse_vector(text: str, w: WeightTable | None = None) -> CwssVector:
    """Parse ``TI:H/AP:A/...``; order-insensitive, all 16 factors required.

    Codes are checked against ``w`` (the bundled table by default).
    """
    w = w or default_weights()
    body = text.strip()
    if body.startswith("(") and body.endswith(")"):
        body = body[1:-1]
    seen: dict[str, str] = {}
    pos = 0
    for i, part in enumerate(body.split("/")):
        m = _PAIR.match(part.strip())
        if not m:
            raise CwssError(f"malformed pair {part!r} at position {i} (char {pos})")
        abbrev, code = m.groups()
        if abbrev not in ABBREV_TO_FIELD:
            raise CwssError(f"unknown factor {abbrev!r} at position {i} (char {pos})")
        if abbrev in seen:
            raise CwssError(f"duplicate factor {abbrev} at position {i} (char {pos})")
        base_code, _ = _split_code(code)
        if base_code not in w.weights[abbrev]:
            raise CwssError(f"unknown code {code!r} for factor {abbrev} at position {i} (char {pos})")
        seen[abbrev] = code
        pos += len(part) + 1
    missing = [f"{a} ({f})" for a, f, _ in FACTORS if a not in seen]
    if missing:
        raise CwssError(f"vector missing factor(s): {', '.join(missing)}")
    return CwssVector(**{ABBREV_TO_FIELD[a]: c for a, c in seen.items()})


# ---------------------------------------------------------------- suggestions

# (technical impact, business impact) starting points per category
CATEGORY_IMPACT: Mapping[DesignFlawCategory, tuple[str, str]] = MappingProxyType({
    DesignFlawCategory.FrontRunning: ("M", "H"),
    DesignFlawCategory.TimeManipulation: ("M", "M"),
    DesignFlawCategory.DenialOfService: ("H", "H"),
    DesignFlawCategory.ArithmeticIssues: ("H", "H"),
    DesignFlawCategory.BadRandomness: ("M", "H"),
    DesignFlawCategory.SensitiveDataExposure: ("M", "M"),
    DesignFlawCategory.KnownVulnerableComponents: ("M", "M"),
    DesignFlawCategory.BrokenAccessControl: ("H", "H"),
    DesignFlawCategory.ImproperInheritance: ("H", "H"),
    DesignFlawCategory.ModularityViolation: ("L", "M"),
})

_LEVEL_ORDER = ["N", "L", "M", "H", "C"]


def suggest_vector(nf: "NormalizedFinding | None", profile: "ContractProfile | None" = None) -> CwssVector:
    """A starting vector for a finding. Advisory: user-supplied vectors win.

    Impacts come from the finding's design-flaw category; agreement between
    two or more tools marks the finding as proven and easy to discover.
    """
    category = getattr(nf, "category", None)
    if category is None:
        return CwssVector()
    ti, bi = CATEGORY_IMPACT.get(category, ("D", "D"))
    # contracts in the most active category band expose more business value
    if profile is not None and profile.cal_score >= 6 and bi in _LEVEL_ORDER:
        bi = max(bi, "H", key=_LEVEL_ORDER.index)
    tools = tuple(getattr(nf, "reporting_tools", ()) or ())
    v = CwssVector(technical_impact=ti, business_impact=bi)
    if len(tools) >= 2:
        v = v.with_codes(FC="T", DI="H")
    elif tools == ("manual",):
        v = v.with_codes(FC="LT")
    return v


def impact_level(subfactors: Sequence[float | int], buckets: tuple[float, float] = (3, 6)) -> str:
    """Average 0-9 sub-factor ratings and bucket them into L / M / H.

    Used for the technical (confidentiality, integrity, availability,
    accountability) and business (financial, reputation, non-compliance,
    privacy) worksheets.
    """
    if len(subfactors) != 4:
        raise CwssError("impact worksheet takes exactly 4 sub-factor ratings")
    if any(not 0 <= s <= 9 for s in subfactors):
        raise CwssError("sub-factor ratings must lie in 0..9")
    low, high = buckets
    avg = sum(Decimal(str(s)) for s in subfactors) / 4
    if avg < low:
        return "L"
    if avg < high:
        return "M"
    return "H"
