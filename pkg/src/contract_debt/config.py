"""Portfolio and settings documents.

Settings resolve as: explicit flags > environment > config file > bundled
defaults. Relative paths inside a document resolve against its directory.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from decimal import Decimal
from importlib import resources
from pathlib import Path
from typing import Any, Mapping

import yaml

from .cwss import CwssVector, WeightTable, default_weights, load_weights, parse_vector
from .debt import (
    AssessConfig,
    CalTable,
    ContractProfile,
    DebtError,
    PortfolioEntry,
    Thresholds,
)
from .evmgas import (
    ContractBytecode,
    EstimationOptions,
    ExecutionStrategy,
    UpdatePattern,
    load_gas_schedule,
)
from .ingest import NormalizedFinding
from .pricing import (
    PRICE_URL_ENV,
    PriceQuote,
    PriceSource,
    parse_decimal,
    source_from_config,
    static_quote,
)

CONFIG_ENV = "CONTRACT_DEBT_CONFIG"


class ConfigError(ValueError):
    pass


# ---------------------------------------------------------------- settings

_CONFIG_KEYS = {
    "value_thresholds", "cost_thresholds", "activity", "update", "estimation",
    "gas_schedule", "weights", "quote", "price_source",
}


def _read_yaml(path: Path) -> Any:
    try:
        return yaml.safe_load(Path(path).read_text())
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: {exc}") from None


def bundled_config() -> dict[str, Any]:
    text = resources.files("contract_debt").joinpath("data/default_config.yaml").read_text()
    return yaml.safe_load(text)


def _merge(base: Mapping[str, Any], over: Mapping[str, Any]) -> dict[str, Any]:
    # sections merge key by key; values inside a section replace wholesale
    out = dict(base)
    for k, v in over.items():
        if isinstance(v, Mapping) and isinstance(out.get(k), Mapping):
            out[k] = {**out[k], **v}
        else:
            out[k] = v
    return out


@dataclass(frozen=True)
class Settings:
    assess: AssessConfig
    cal_table: CalTable
    fallback_quote: PriceQuote | None
    price_source: Mapping[str, Any]
    base_dir: Path | None = None
    raw: Mapping[str, Any] = field(default_factory=dict)


def config_path(flag: str | Path | None, env: Mapping[str, str] | None = None) -> Path | None:
    env = os.environ if env is None else env
    if flag:
        return Path(flag)
    if env.get(CONFIG_ENV):
        return Path(env[CONFIG_ENV])
    return None


def _thresholds(value: Any, what: str) -> Thresholds:
    if isinstance(value, Mapping):
        pair = (value.get("low"), value.get("high"))
    elif isinstance(value, (list, tuple)) and len(value) == 2:
        pair = tuple(value)
    else:
        raise ConfigError(f"{what}: expected [low, high] or {{low, high}}")
    try:
        return Thresholds(parse_decimal(pair[0], what), parse_decimal(pair[1], what))
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"{what}: {exc}") from None


def load_settings(path: Path | None = None, jobs: int = 1) -> Settings:
    doc = bundled_config()
    base_dir = None
    if path is not None:
        user = _read_yaml(path) or {}
        if not isinstance(user, Mapping):
            raise ConfigError(f"{path}: config must be a mapping")
        unknown = set(user) - _CONFIG_KEYS
        if unknown:
            raise ConfigError(f"{path}: unknown config field(s) {sorted(unknown)}")
        doc = _merge(doc, user)
        base_dir = Path(path).parent
    return settings_from_doc(doc, base_dir, jobs)


def _resolve_path(p: Any, base_dir: Path | None) -> Path:
    p = Path(str(p))
    return p if p.is_absolute() or base_dir is None else base_dir / p


def settings_from_doc(doc: Mapping[str, Any], base_dir: Path | None = None, jobs: int = 1) -> Settings:
    try:
        act = doc.get("activity") or {}
        cal = CalTable(
            categories=tuple(c.lower() for c in act.get("categories", ())) or CalTable().categories,
            bands={str(k): Decimal(str(v)) for k, v in (act.get("bands") or {}).items()} or CalTable().bands,
        )

        upd = doc.get("update") or {}
        update = UpdatePattern(upd.get("pattern", "selfdestruct"), upd.get("proxy_gas"))
        if update.kind == "proxy" and update.proxy_gas is None:
            raise ConfigError("update: proxy pattern needs proxy_gas")

        est = doc.get("estimation") or {}
        estimation = EstimationOptions(
            include_calldata=bool(est.get("include_calldata", False)),
            execution=ExecutionStrategy(est.get("execution", "zero")),
            strict=bool(est.get("strict", False)),
        )

        gs = doc.get("gas_schedule")
        if isinstance(gs, (str, Path)):
            schedule = load_gas_schedule(_resolve_path(gs, base_dir))
        else:
            schedule = load_gas_schedule(gs)

        w = doc.get("weights")
        weights: WeightTable = load_weights(_resolve_path(w, base_dir)) if w else default_weights()

        ct = doc.get("cost_thresholds", "portfolio-max")
        cost_t = None if ct in (None, "portfolio-max") else _thresholds(ct, "cost_thresholds")
        value_t = _thresholds(doc.get("value_thresholds", [100, 200]), "value_thresholds")

        q = doc.get("quote")
        fallback = static_quote(q["gas_price_gwei"], q["eth_usd"]) if q else None
    except ConfigError:
        raise
    except (ValueError, KeyError, TypeError, OSError) as exc:
        raise ConfigError(f"bad config: {exc}") from None

    return Settings(
        assess=AssessConfig(
            schedule=schedule,
            estimation=estimation,
            update=update,
            value_thresholds=value_t,
            cost_thresholds=cost_t,
            weights=weights,
            jobs=max(1, jobs),
        ),
        cal_table=cal,
        fallback_quote=fallback,
        price_source=doc.get("price_source") or {},
        base_dir=base_dir,
        raw=doc,
    )


def price_url(flag: str | None, settings: Settings, env: Mapping[str, str] | None = None) -> str | None:
    env = os.environ if env is None else env
    return flag or env.get(PRICE_URL_ENV) or settings.price_source.get("url")


def build_price_source(settings: Settings, url: str) -> PriceSource:
    return source_from_config(settings.price_source, url=url, fallback=settings.fallback_quote)


# ---------------------------------------------------------------- portfolio

_ENTRY_KEYS = {
    "name", "loc", "activity_category", "lifespan_days", "init_code", "runtime_code",
    "runtime_len", "deploy_gas", "execution_gas", "findings", "vectors",
}
_ENTRY_REQUIRED = {"name", "activity_category", "lifespan_days"}


@dataclass(frozen=True)
class PortfolioSpec:
    """A portfolio document before findings are attached."""

    name: str
    entries: tuple[PortfolioEntry, ...]
    findings_files: tuple[Path, ...] = ()


def _opt_int(rec: Mapping[str, Any], key: str, rid: str) -> int | None:
    v = rec.get(key)
    if v is None:
        return None
    if isinstance(v, bool) or not isinstance(v, int) or v < 0:
        raise ConfigError(f"contract {rid}: {key} must be a non-negative integer")
    return v


def _entry(rec: Any, base_dir: Path | None, cal: CalTable, weights: WeightTable | None):
    if not isinstance(rec, Mapping):
        raise ConfigError("portfolio entries must be mappings")
    rid = str(rec.get("name", "?"))
    missing = _ENTRY_REQUIRED - set(rec)
    if missing:
        raise ConfigError(f"contract {rid}: missing field(s) {sorted(missing)}")
    unknown = set(rec) - _ENTRY_KEYS
    if unknown:
        raise ConfigError(f"contract {rid}: unknown field(s) {sorted(unknown)}")
    try:
        profile = ContractProfile.build(rid, str(rec["activity_category"]), rec["lifespan_days"],
                                        loc=rec.get("loc"), table=cal)
    except DebtError as exc:
        raise ConfigError(f"contract {rid}: {exc}") from None

    vectors: dict[str, CwssVector] = {}
    for slug, text in (rec.get("vectors") or {}).items():
        try:
            vectors[slug] = parse_vector(str(text), weights)
        except ValueError as exc:
            raise ConfigError(f"contract {rid}: vector for {slug}: {exc}") from None

    deploy_gas = _opt_int(rec, "deploy_gas", rid)
    runtime_len = _opt_int(rec, "runtime_len", rid)
    bytecode, load_error = None, None
    if rec.get("init_code") or rec.get("runtime_code") or runtime_len is not None:
        try:
            bytecode = ContractBytecode.from_files(
                _resolve_path(rec["init_code"], base_dir) if rec.get("init_code") else None,
                _resolve_path(rec["runtime_code"], base_dir) if rec.get("runtime_code") else None,
                runtime_len,
            )
        except (OSError, ValueError) as exc:
            load_error = f"cannot load bytecode: {exc}"
    elif deploy_gas is None:
        load_error = "no bytecode and no deploy_gas given"

    files = tuple(_resolve_path(p, base_dir) for p in rec.get("findings") or ())
    entry = PortfolioEntry(
        profile=profile,
        vectors=vectors,
        bytecode=bytecode,
        deploy_gas_override=deploy_gas,
        execution_gas=_opt_int(rec, "execution_gas", rid),
        load_error=load_error,
    )
    return entry, files


def load_portfolio(path: Path, cal: CalTable | None = None,
                   weights: WeightTable | None = None) -> PortfolioSpec:
    """Read an array of contract entries, or ``{name, contracts: [...]}``."""
    path = Path(path)
    doc = _read_yaml(path)
    name = path.stem
    if isinstance(doc, Mapping):
        unknown = set(doc) - {"name", "contracts"}
        if unknown:
            raise ConfigError(f"{path}: unknown field(s) {sorted(unknown)}")
        name = str(doc.get("name", name))
        doc = doc.get("contracts") or []
    if doc is None:
        doc = []
    if not isinstance(doc, list):
        raise ConfigError(f"{path}: portfolio must be a list of contracts")
    entries, files = [], []
    for rec in doc:
        e, f = _entry(rec, path.parent, cal or CalTable(), weights)
        entries.append(e)
        files.extend(f)
    names = [e.profile.name for e in entries]
    dupes = sorted({n for n in names if names.count(n) > 1})
    if dupes:
        raise ConfigError(f"{path}: duplicate contract name(s) {dupes}")
    return PortfolioSpec(name, tuple(entries), tuple(dict.fromkeys(files)))


def attach_findings(spec: PortfolioSpec, findings: list[NormalizedFinding]) -> tuple[list[PortfolioEntry], list[str]]:
    """Give each entry its findings; report findings naming unknown contracts."""
    by_name: dict[str, list[NormalizedFinding]] = {}
    for nf in findings:
        by_name.setdefault(nf.contract_name, []).append(nf)
    known = {e.profile.name for e in spec.entries}
    stray = sorted(set(by_name) - known)
    warnings = [f"findings for contract {n!r} not in portfolio; ignored" for n in stray]
    entries = [
        PortfolioEntry(e.profile, tuple(by_name.get(e.profile.name, ())), e.vectors, e.bytecode,
                       e.deploy_gas_override, e.execution_gas, e.load_error)
        for e in spec.entries
    ]
    return entries, warnings

