"""Generate the 16-contract benchmark fixture under tests/fixtures/benchmark.

Bytecode is SYNTHETIC: a minimal constructor that CODECOPYs and RETURNs a
seeded pseudo-random runtime blob of a chosen length. Only the runtime length
matters for the default (zero-execution) estimate; lengths are picked so the
costs spread over the three cost bands and the top cost lands at $100.25.

Findings reproduce the per-contract vulnerability counts with realistic tool
overlap (several scanners flagging the same lines) plus manual-analysis
additions and one finding no catalog entry covers.

    python3 scripts/make_benchmark_fixture.py [--out tests/fixtures/benchmark]
"""

from __future__ import annotations

import argparse
import json
import random
from pathlib import Path

import yaml

# name, loc, activity category, lifespan days, runtime bytes
CONTRACTS = [
    ("FindThisHash", 9, "games", 200, 600),
    ("EtherLotto", 20, "gambling", 400, 1400),
    ("Roulette", 14, "gambling", 300, 1000),
    ("Lottopollo", 24, "gambling", 600, 1700),
    ("DosAuction", 13, "marketplaces", 150, 900),
    ("SimpleToken", 65, "finance", 700, 4800),
    ("Etheraffle", 122, "gambling", 900, 7666),
    ("DosNumber", 28, "development", 100, 2000),
    ("AccessControl", 53, "wallet", 500, 3900),
    ("BlockdBuildDemo", 62, "property", 250, 4500),
    ("FunctionTypes", 18, "development", 60, 1200),
    ("OddEven", 22, "games", 120, 1500),
    ("Transaction_malleablity", 77, "exchanges", 650, 5600),
    ("Token", 17, "finance", 800, 1100),
    ("TokenSaleChallenge", 20, "exchanges", 300, 1300),
    # 53000 + 200 * 4196 = 892200 deployment gas
    ("CEOThrone", 21, "games", 800, 4196),
]

CEO_VECTOR = "TI:H/AP:A/AL:A/IC:L/FC:T/RP:N/RL:S/AV:I/AS:N/IN:A/SC:M/BI:H/DI:H/EX:H/EC:N/P:C"

# contract -> [(tool, code, line_start, line_end)]; overlapping ranges merge
AUTO = {
    "FindThisHash": [("securify", "TODAmount", 6, 8), ("mythril", "SWC-114", 7, 7)],
    "EtherLotto": [("slither", "weak-prng", 14, 15), ("mythril", "SWC-120", 15, 15)],
    "Roulette": [("slither", "timestamp", 9, 10), ("smartcheck", "SOLIDITY_EXACT_TIME", 10, 10),
                 ("solhint", "not-rely-on-time", 9, 9)],
    "Lottopollo": [("mythril", "SWC-120", 11, 13), ("solhint", "not-rely-on-block-hash", 13, 13)],
    "DosAuction": [("mythril", "SWC-113", 8, 10), ("solhint", "multiple-sends", 9, 9)],
    "SimpleToken": [("slither", "suicidal", 58, 61), ("securify", "UnrestrictedSelfdestruct", 60, 60),
                    ("solhint", "avoid-suicide", 60, 60), ("mythril", "SWC-106", 60, 60)],
    "Etheraffle": [("slither", "weak-prng", 71, 74), ("sfuzz", "block-number-dependency", 72, 72)],
    "DosNumber": [("smartcheck", "SOLIDITY_GAS_LIMIT_IN_LOOPS", 17, 20)],
    "AccessControl": [("slither", "tx-origin", 22, 22), ("solhint", "avoid-tx-origin", 22, 22),
                      ("smartcheck", "SOLIDITY_TX_ORIGIN", 21, 23)],
    "BlockdBuildDemo": [("slither", "naming-convention", 3, 3)],  # style rule, unmapped
    "FunctionTypes": [("mythril", "SWC-127", 12, 14)],
    "OddEven": [("smartcheck", "SOLIDITY_PRIVATE_MODIFIER_DONT_HIDE_DATA", 5, 6)],
    "Token": [("mythril", "SWC-101", 11, 11), ("smartcheck", "SOLIDITY_UINT_OVERFLOW", 11, 12),
              ("sfuzz", "integer-underflow", 12, 12)],
    "TokenSaleChallenge": [("mythril", "SWC-101", 14, 14), ("manticore", "overflow", 14, 15)],
    "CEOThrone": [("slither", "shadowing-state", 4, 4), ("securify", "ShadowedStateVariable", 4, 4),
                  ("smartcheck", "SOLIDITY_SHADOWING", 4, 5), ("solhint", "no-shadow-state", 4, 4),
                  ("mythos", "SWC-119", 4, 4)],
}

MANUAL = [
    ("Etheraffle", "costly-loop", 96, 104),
    ("BlockdBuildDemo", "unrestricted-write", 31, 33),
    ("BlockdBuildDemo", "unprotected-ether-withdrawal", 44, 48),
    ("BlockdBuildDemo", "default-function-visibility", 52, 52),
    ("FunctionTypes", "arbitrary-storage-write", 7, 9),
    ("Transaction_malleablity", "signature-malleability", 40, 46),
]

# opcodes safe to sprinkle in synthetic runtime code
_FILL = [0x01, 0x02, 0x03, 0x10, 0x14, 0x15, 0x16, 0x19, 0x1C, 0x35, 0x36, 0x50, 0x51,
         0x52, 0x54, 0x56, 0x57, 0x5B, 0x80, 0x81, 0x90, 0x91, 0xF3, 0xFD]


def runtime_blob(name: str, length: int) -> bytes:
    rng = random.Random(name)
    out = bytearray(bytes.fromhex("6080604052"))
    while len(out) < length:
        room = length - len(out)
        if room >= 3 and rng.random() < 0.3:
            n = rng.randint(1, min(4, room - 1))
            out.append(0x5F + n)
            out.extend(rng.randbytes(n))
        else:
            out.append(rng.choice(_FILL))
    return bytes(out[:length])


def init_code(runtime: bytes) -> bytes:
    head_len = 19
    head = (bytes.fromhex("6080604052")
            + b"\x61" + len(runtime).to_bytes(2, "big") + b"\x80"
            + b"\x61" + head_len.to_bytes(2, "big")
            + bytes.fromhex("600039" "6000f3" "fe"))
    assert len(head) == head_len
    return head + runtime


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default=str(Path(__file__).resolve().parent.parent / "tests/fixtures/benchmark"))
    args = ap.parse_args()
    out = Path(args.out)
    (out / "bytecode").mkdir(parents=True, exist_ok=True)
    (out / "findings").mkdir(exist_ok=True)

    entries = []
    for name, loc, category, days, rlen in CONTRACTS:
        rt = runtime_blob(name, rlen)
        (out / "bytecode" / f"{name}.runtime.hex").write_text(rt.hex() + "\n")
        (out / "bytecode" / f"{name}.init.hex").write_text(init_code(rt).hex() + "\n")
        entry = {
            "name": name, "loc": loc, "activity_category": category, "lifespan_days": days,
            "init_code": f"bytecode/{name}.init.hex", "runtime_code": f"bytecode/{name}.runtime.hex",
        }
        if name == "CEOThrone":
            entry["vectors"] = {"variable-shadowing": CEO_VECTOR}
        entries.append(entry)
    (out / "portfolio.yaml").write_text(yaml.safe_dump({"name": "benchmark", "contracts": entries}, sort_keys=False))

    by_tool: dict[str, list[dict]] = {}
    for contract, rows in AUTO.items():
        for tool, code, lo, hi in rows:
            by_tool.setdefault(tool, []).append({
                "tool": tool, "tool_code": code, "contract": contract,
                "file": f"{contract}.sol", "line_start": lo, "line_end": hi,
            })
    for tool, recs in sorted(by_tool.items()):
        (out / "findings" / f"{tool}.json").write_text(json.dumps(recs, indent=2) + "\n")

    manual = [{"tool": "manual", "vulnerability_id": slug, "contract": c, "file": f"{c}.sol",
               "line_start": lo, "line_end": hi, "confidence": "High"} for c, slug, lo, hi in MANUAL]
    (out / "manual.json").write_text(json.dumps(manual, indent=2) + "\n")
    (out / "quote.yaml").write_text("gas_price_gwei: 126\neth_usd: 500\n")
    print(f"wrote fixture to {out}")


if __name__ == "__main__":
    main()
