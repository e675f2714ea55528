"""Gas-price and ETH/USD quotes: static values or a JSON-over-HTTP source."""

from __future__ import annotations

import json
import logging
import re
import threading
import time
from dataclasses import dataclass
from datetime import datetime, timezone
from decimal import Decimal
from pathlib import Path
from typing import Any, Callable, Mapping

import requests
import yaml

log = logging.getLogger(__name__)

PRICE_URL_ENV = "CONTRACT_DEBT_PRICE_URL"
_PLAIN_DECIMAL = re.compile(r"^\d+(\.\d+)?$")


class PricingError(ValueError):
    pass


def parse_decimal(value: Any, what: str = "value") -> Decimal:
    """Parse a non-negative plain decimal. Exponents and signs are rejected."""
    if isinstance(value, bool):
        raise PricingError(f"{what}: expected a number, got {value!r}")
    if isinstance(value, float):
        value = repr(value)
    text = str(value).strip()
    if not _PLAIN_DECIMAL.match(text):
        raise PricingError(f"{what}: not a non-negative plain decimal: {text!r}")
    return Decimal(text)


@dataclass(frozen=True)
class PriceQuote:
    gas_price_gwei: Decimal
    eth_usd: Decimal
    timestamp: datetime
    source: str = "static"
    warnings: tuple[str, ...] = ()

    def __post_init__(self):
        if self.gas_price_gwei < 0 or self.eth_usd < 0:
            raise PricingError("quote values must be non-negative")


def static_quote(gas_price_gwei: Any, eth_usd: Any, timestamp: datetime | None = None) -> PriceQuote:
    return PriceQuote(
        gas_price_gwei=parse_decimal(gas_price_gwei, "gas_price_gwei"),
        eth_usd=parse_decimal(eth_usd, "eth_usd"),
        timestamp=timestamp or datetime.now(timezone.utc),
        source="static",
    )


def load_quote_file(path: Path) -> PriceQuote:
    """Read a ``{gas_price_gwei, eth_usd}`` document (JSON or YAML)."""
    # parse floats as strings so 0.1 stays 0.1
    doc = yaml.load(Path(path).read_text(), Loader=_StrFloatLoader)
    if not isinstance(doc, dict) or set(doc) - {"gas_price_gwei", "eth_usd", "timestamp"}:
        raise PricingError(f"{path}: quote file must hold gas_price_gwei and eth_usd")
    try:
        return static_quote(doc["gas_price_gwei"], doc["eth_usd"])
    except KeyError as exc:
        raise PricingError(f"{path}: missing {exc.args[0]}") from None


class _StrFloatLoader(yaml.SafeLoader):
    pass


_StrFloatLoader.add_constructor(
    "tag:yaml.org,2002:float", lambda loader, node: loader.construct_scalar(node)
)


@dataclass(frozen=True)
class PriceSource:
    url: str
    gas_path: str
    usd_path: str
    timeout: float = 5.0
    cache_ttl: float = 60.0
    fallback: PriceQuote | None = None


def _select(doc: Any, path: str) -> Any:
    for part in path.split("."):
        if isinstance(doc, list) and part.isdigit():
            doc = doc[int(part)]
        elif isinstance(doc, dict):
            doc = doc[part]
        else:
            raise KeyError(path)
    return doc


class QuoteCache:
    """Per-URL quote cache; readers never block, one writer updates."""

    def __init__(self, clock: Callable[[], float] = time.monotonic):
        self._clock = clock
        self._entries: dict[str, tuple[float, PriceQuote]] = {}
        self._lock = threading.Lock()

    def get(self, url: str, ttl: float) -> PriceQuote | None:
        hit = self._entries.get(url)
        if hit and self._clock() - hit[0] < ttl:
            return hit[1]
        return None

    def put(self, url: str, quote: PriceQuote) -> None:
        with self._lock:
            self._entries[url] = (self._clock(), quote)

    def clear(self) -> None:
        with self._lock:
            self._entries.clear()


_cache = QuoteCache()


def fetch_quote(
    source: PriceSource,
    session: requests.Session | None = None,
    cache: QuoteCache | None = None,
) -> PriceQuote:
    """Fetch a quote over HTTP, falling back to ``source.fallback`` on any failure."""
    cache = cache if cache is not None else _cache
    cached = cache.get(source.url, source.cache_ttl)
    if cached is not None:
        return cached
    getter = session.get if session is not None else requests.get
    try:
        resp = getter(source.url, timeout=source.timeout)
        resp.raise_for_status()
        doc = json.loads(resp.text, parse_float=str, parse_int=str)
        quote = PriceQuote(
            gas_price_gwei=parse_decimal(_select(doc, source.gas_path), source.gas_path),
            eth_usd=parse_decimal(_select(doc, source.usd_path), source.usd_path),
            timestamp=datetime.now(timezone.utc),
            source=f"http({source.url})",
        )
    except (requests.RequestException, ValueError, KeyError, IndexError, TypeError) as exc:
        if source.fallback is None:
            raise PricingError(
                f"price fetch from {source.url} failed ({exc}); supply --quote with a static quote"
            ) from exc
        msg = f"price fetch from {source.url} failed ({exc}); using static fallback quote"
        log.warning(msg)
        return PriceQuote(
            gas_price_gwei=source.fallback.gas_price_gwei,
            eth_usd=source.fallback.eth_usd,
            timestamp=source.fallback.timestamp,
            source="static",
            warnings=source.fallback.warnings + (msg,),
        )
    cache.put(source.url, quote)
    return quote


def source_from_config(cfg: Mapping[str, Any], url: str | None = None,
                       fallback: PriceQuote | None = None) -> PriceSource:
    """Build a PriceSource; ``url`` (flag or env) overrides the config value."""
    url = url or cfg.get("url")
    if not url:
        raise PricingError("no price URL configured")
    return PriceSource(
        url=url,
        gas_path=cfg.get("gas_path", "gas_price_gwei"),
        usd_path=cfg.get("usd_path", "eth_usd"),
        timeout=float(cfg.get("timeout", 5.0)),
        cache_ttl=float(cfg.get("cache_ttl", 60.0)),
        fallback=fallback,
    )
