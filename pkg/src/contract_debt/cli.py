"""contract-debt: catalog lookups, gas principal, CWSS scoring and assessment.

Exit codes: 0 success, 1 domain failure (not found, a contract failed),
2 usage error (bad flags, unreadable or malformed inputs).
"""

from __future__ import annotations

import argparse
import dataclasses
import logging
import os
import sys
from pathlib import Path

from . import report
from .catalog import (
    Catalog,
    CatalogError,
    DesignFlawCategory,
    by_category,
    by_cwe,
    default_catalog,
    load_catalog,
    lookup,
)
from .config import (
    ConfigError,
    Settings,
    attach_findings,
    build_price_source,
    config_path,
    load_portfolio,
    load_settings,
    price_url,
)
from .cwss import CwssError, default_weights, load_weights, parse_vector, render_vector, score, suggest_vector
from .debt import DebtError, assess
from .evmgas import (
    ContractBytecode,
    EstimationOptions,
    ExecutionStrategy,
    GasError,
    UpdatePattern,
    load_gas_schedule,
    principal,
)
from .ingest import FindingsError, NormalizedFinding, load_findings_files, merge_manual, normalize
from .pricing import PriceQuote, PricingError, fetch_quote, load_quote_file, static_quote

log = logging.getLogger("contract_debt")

OK, FAIL, USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _print_table(rows: list[list[str]], header: list[str]) -> None:
    widths = [max(len(str(r[i])) for r in [header] + rows) for i in range(len(header))]
    for r in [header] + rows:
        print("  ".join(str(c).ljust(w) for c, w in zip(r, widths)).rstrip())


def _catalog(args) -> Catalog:
    return load_catalog(Path(args.catalog)) if getattr(args, "catalog", None) else default_catalog()


def _vuln_row(v) -> list[str]:
    return [v.id, v.category.slug, ",".join(map(str, v.cwe_ids)), v.name]


# ---------------------------------------------------------------- catalog

def cmd_catalog(args) -> int:
    cat = _catalog(args)
    if args.action == "list":
        vulns = list(cat)
        if args.category:
            try:
                vulns = by_category(cat, DesignFlawCategory.parse(args.category))
            except ValueError as exc:
                print(f"error: {exc}", file=sys.stderr)
                return FAIL
        _print_table([_vuln_row(v) for v in vulns], ["id", "category", "cwe", "name"])
        return OK
    if args.action == "show":
        v = lookup(cat, args.slug)
        if v is None:
            print(f"error: no vulnerability {args.slug!r} in catalog", file=sys.stderr)
            return FAIL
        print(f"id:          {v.id}")
        print(f"name:        {v.name}")
        print(f"category:    {' / '.join(c.value for c in v.categories)}")
        cwes = [f"CWE-{n}" + (f" ({cat.weakness_name(n)})" if cat.weakness_name(n) else "") for n in v.cwe_ids]
        print(f"cwe:         {', '.join(cwes)}")
        if v.swc_id is not None:
            print(f"swc:         SWC-{v.swc_id}")
        print(f"description: {v.description}")
        if v.remediation_note:
            print(f"remediation: {v.remediation_note}")
        if v.notes:
            print(f"notes:       {v.notes}")
        return OK
    # cwe
    hits = by_cwe(cat, args.cwe_id)
    if not hits:
        print(f"error: no vulnerability maps to CWE-{args.cwe_id}", file=sys.stderr)
        return FAIL
    _print_table([_vuln_row(v) for v in hits], ["id", "category", "cwe", "name"])
    return OK


# ---------------------------------------------------------------- quotes

def _quote_arg(value: str) -> PriceQuote:
    """A quote file path, or inline ``GWEI,USD``."""
    p = Path(value)
    if p.exists():
        return load_quote_file(p)
    if "," in value:
        g, usd = value.split(",", 1)
        return static_quote(g, usd)
    raise UsageError(f"--quote: no such file {value!r} (or give GWEI,USD)")


def _resolve_quote(args, settings: Settings) -> PriceQuote:
    if args.quote:
        return _quote_arg(args.quote)
    url = price_url(getattr(args, "price_url", None), settings)
    if url:
        return fetch_quote(build_price_source(settings, url))
    if settings.fallback_quote is not None:
        return settings.fallback_quote
    q = static_quote(0, 0)
    return dataclasses.replace(q, warnings=("no quote given; fees reported as 0 (gas-only mode)",))


# ---------------------------------------------------------------- gas

def cmd_gas(args) -> int:
    settings = load_settings(config_path(args.config))
    if not (args.init_code or args.runtime_code or args.runtime_len is not None or args.deploy_gas is not None):
        raise UsageError("give --init-code, --runtime-code, --runtime-len or --deploy-gas")
    if args.strict and args.deploy_gas is None and args.runtime_code is None and args.runtime_len is None:
        raise UsageError("--strict needs the runtime length (--runtime-code or --runtime-len)")
    schedule = load_gas_schedule(Path(args.gas_schedule)) if args.gas_schedule else settings.assess.schedule
    est = settings.assess.estimation
    opts = EstimationOptions(
        include_calldata=args.calldata or est.include_calldata,
        execution=ExecutionStrategy(args.execution) if args.execution else est.execution,
        provided_execution_gas=args.execution_gas,
        strict=args.strict or est.strict,
    )
    if args.execution_gas is not None and not args.execution:
        opts = dataclasses.replace(opts, execution=ExecutionStrategy.provided)
    update = settings.assess.update
    if args.update:
        update = UpdatePattern(args.update, args.proxy_gas if args.proxy_gas is not None else update.proxy_gas)
    try:
        code = ContractBytecode.from_files(
            Path(args.init_code) if args.init_code else None,
            Path(args.runtime_code) if args.runtime_code else None,
            args.runtime_len,
        )
    except (OSError, ValueError) as exc:
        raise UsageError(f"cannot read bytecode: {exc}") from None
    quote = _resolve_quote(args, settings)
    p = principal(code, schedule, opts, quote, update, deploy_gas_override=args.deploy_gas)
    warnings = list(quote.warnings) + list(p.warnings)
    if args.json:
        doc = report.principal_dict(p)
        doc["warnings"] = warnings
        doc["quote"] = {"gas_price_gwei": format(quote.gas_price_gwei.normalize(), "f"),
                        "eth_usd": report.fmt(quote.eth_usd, 2), "source": quote.source}
        sys.stdout.write(report.canonical_json(doc).decode())
        return OK
    _print_table([[k, str(v)] for k, v in p.breakdown.items()], ["component", "gas"])
    suffix = " (execution is a static lower bound)" if p.execution_lower_bound else ""
    print(f"total gas:   {p.total_gas}{suffix}")
    print(f"fee:         {report.fmt(p.fee_eth, 9)} ETH  ${report.fmt(p.fee_usd, 2)}"
          f"  at {quote.gas_price_gwei} Gwei, ${quote.eth_usd}/ETH")
    for w in warnings:
        print(f"warning: {w}", file=sys.stderr)
    return OK


# ---------------------------------------------------------------- score

def cmd_score(args) -> int:
    weights = load_weights(Path(args.weights)) if args.weights else default_weights()
    if args.suggest:
        if not args.finding:
            raise UsageError("--suggest needs --finding <slug>")
        v = lookup(_catalog(args), args.finding)
        if v is None:
            print(f"error: no vulnerability {args.finding!r} in catalog", file=sys.stderr)
            return FAIL
        tools = tuple(f"tool{i}" for i in range(args.tools)) if args.tools > 0 else ("manual",)
        nf = NormalizedFinding(tools[0], "-", v.id, "-", 1, 1, v.id, v.category, v.cwe_ids, tools,
                               secondary_categories=v.secondary_categories)
        vector = suggest_vector(nf)
        print(render_vector(vector))
    else:
        if not args.vector:
            raise UsageError("give --vector or --suggest")
        try:
            vector = parse_vector(args.vector, weights)
        except CwssError as exc:
            raise UsageError(f"malformed vector: {exc}") from None
    s = score(vector, weights)
    print(f"base:          {report.fmt(s.base_subscore, 1)}")
    print(f"attack_surface: {report.fmt(s.attack_surface_subscore, 4)}")
    print(f"environmental: {report.fmt(s.environmental_subscore, 4)}")
    print(f"total:         {report.fmt(s.total, 1)}")
    return OK


# ---------------------------------------------------------------- assess

FORMATS = {"json": "assessment.json", "markdown": "assessment.md", "csv": "scatter.csv"}


def _render(a, fmt: str) -> bytes:
    if fmt == "json":
        return report.render_json(a)
    if fmt == "markdown":
        return report.render_markdown(a).encode("utf-8")
    return report.render_scatter_csv(a).encode("utf-8")


def cmd_assess(args) -> int:
    settings = load_settings(config_path(args.config), jobs=args.jobs)
    catalog = _catalog(args)
    spec = load_portfolio(Path(args.portfolio), settings.cal_table, settings.assess.weights)
    raw = load_findings_files(list(spec.findings_files) + [Path(p) for p in args.findings or ()])
    findings, unmapped = normalize(raw, catalog)
    if args.manual:
        findings = merge_manual(findings, Path(args.manual), catalog)
    entries, warnings = attach_findings(spec, findings)
    try:
        quote = _resolve_quote(args, settings)
    except PricingError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return FAIL
    a = assess(entries, settings.assess, quote, name=spec.name, unmapped=unmapped)
    if warnings:
        a = dataclasses.replace(a, warnings=a.warnings + tuple(warnings))

    formats = [f.strip() for f in (args.format or "").split(",") if f.strip()]
    bad = [f for f in formats if f not in FORMATS]
    if bad:
        raise UsageError(f"--format: unknown format(s) {bad}; choose from {sorted(FORMATS)}")
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        for fmt, fname in FORMATS.items():
            (out / fname).write_bytes(_render(a, fmt))
    elif not formats:
        formats = ["json"]
    for fmt in formats:
        sys.stdout.buffer.write(_render(a, fmt))
    sys.stdout.flush()
    for e in a.errors:
        print(f"error: {e.contract}: {e.error}", file=sys.stderr)
    return FAIL if a.errors else OK


# ---------------------------------------------------------------- parser

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="contract-debt", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("catalog", help="query the design-vulnerability catalog")
    c.add_argument("--catalog", help="catalog YAML instead of the bundled one")
    csub = c.add_subparsers(dest="action", required=True)
    cl = csub.add_parser("list", help="list entries")
    cl.add_argument("--category", help="design-flaw category, e.g. denial-of-service")
    cs = csub.add_parser("show", help="show one entry")
    cs.add_argument("slug")
    cc = csub.add_parser("cwe", help="entries mapped to a CWE id")
    cc.add_argument("cwe_id", type=int)
    c.set_defaults(func=cmd_catalog)

    g = sub.add_parser("gas", help="principal (gas and fee) of redeploying one contract")
    g.add_argument("--init-code", help="init (creation) bytecode hex file")
    g.add_argument("--runtime-code", help="runtime bytecode hex file")
    g.add_argument("--runtime-len", type=int, help="runtime code length in bytes")
    g.add_argument("--deploy-gas", type=int, help="measured deployment gas; skips estimation")
    g.add_argument("--update", choices=["selfdestruct", "proxy"])
    g.add_argument("--proxy-gas", type=int, help="gas of the proxy address swap")
    g.add_argument("--execution", choices=[s.value for s in ExecutionStrategy])
    g.add_argument("--execution-gas", type=int, help="constructor execution gas (provided strategy)")
    g.add_argument("--calldata", action="store_true", help="charge init code as transaction data")
    g.add_argument("--strict", action="store_true", help="fail when the runtime length is unknown")
    g.add_argument("--gas-schedule", help="gas schedule YAML overriding the defaults")
    g.add_argument("--quote", help="quote file, or inline GWEI,USD")
    g.add_argument("--price-url", help="JSON price endpoint")
    g.add_argument("--config", help="config YAML")
    g.add_argument("--json", action="store_true", help="canonical JSON output")
    g.set_defaults(func=cmd_gas)

    s = sub.add_parser("score", help="CWSS score of a vector, or a suggested vector")
    s.add_argument("--vector", help='e.g. "TI:H/AP:A/..."')
    s.add_argument("--suggest", action="store_true")
    s.add_argument("--finding", help="catalog slug for --suggest")
    s.add_argument("--tools", type=int, default=1, help="number of tools reporting the finding (0 = manual)")
    s.add_argument("--weights", help="CWSS weight table YAML")
    s.add_argument("--catalog", help="catalog YAML instead of the bundled one")
    s.set_defaults(func=cmd_score)

    a = sub.add_parser("assess", help="assess a portfolio end to end")
    a.add_argument("--portfolio", required=True)
    a.add_argument("--findings", nargs="*", default=[], help="scanner findings JSON files")
    a.add_argument("--manual", help="manual-analysis findings JSON")
    a.add_argument("--config", help="config YAML (else $CONTRACT_DEBT_CONFIG)")
    a.add_argument("--catalog", help="catalog YAML instead of the bundled one")
    q = a.add_mutually_exclusive_group()
    q.add_argument("--quote", help="quote file, or inline GWEI,USD")
    q.add_argument("--price-url", help="JSON price endpoint (else $CONTRACT_DEBT_PRICE_URL)")
    a.add_argument("--out", help="directory for assessment.json, assessment.md, scatter.csv")
    a.add_argument("--format", help="comma list of json,markdown,csv to print to stdout")
    a.add_argument("--jobs", type=int, default=os.cpu_count() or 1)
    a.set_defaults(func=cmd_assess)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"error: {exc}", file=sys.stderr)
        return USAGE
    except (ConfigError, FindingsError, CatalogError, CwssError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE
    except (GasError, PricingError, DebtError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return FAIL


if __name__ == "__main__":
    sys.exit(main())
