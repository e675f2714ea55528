from decimal import Decimal

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from contract_debt.evmgas import (
    DEFAULT_SCHEDULE,
    ContractBytecode,
    EstimationOptions,
    ExecutionStrategy,
    GasError,
    UpdatePattern,
    calldata_gas,
    decode,
    deployment_gas,
    execution_cost,
    load_gas_schedule,
    parse_hex,
    principal,
    update_gas,
)
from contract_debt.pricing import static_quote

# yellow-paper fee tiers, typed in independently of the package table
TIER = {"zero": 0, "jumpdest": 1, "base": 2, "verylow": 3, "low": 5, "mid": 8, "high": 10}
ORACLE = {
    0x00: TIER["zero"], 0xF3: TIER["zero"], 0xFD: TIER["zero"],
    0x30: TIER["base"], 0x33: TIER["base"], 0x34: TIER["base"], 0x50: TIER["base"],
    0x01: TIER["verylow"], 0x03: TIER["verylow"], 0x10: TIER["verylow"], 0x35: TIER["verylow"],
    0x39: TIER["verylow"], 0x51: TIER["verylow"], 0x52: TIER["verylow"],
    0x60: TIER["verylow"], 0x7F: TIER["verylow"], 0x80: TIER["verylow"], 0x9F: TIER["verylow"],
    0x02: TIER["low"], 0x04: TIER["low"], 0x0B: TIER["low"],
    0x08: TIER["mid"], 0x09: TIER["mid"], 0x56: TIER["mid"],
    0x57: TIER["high"], 0x5B: TIER["jumpdest"],
    0x20: 30, 0xF0: 32000, 0xFF: 5000,
}


@pytest.mark.parametrize("op,cost", sorted(ORACLE.items()))
def test_base_costs_match_yellow_paper(op, cost):
    assert DEFAULT_SCHEDULE.base_gas(op) == cost


def test_schedule_defaults():
    s = DEFAULT_SCHEDULE
    assert (s.g_create, s.g_transaction, s.g_codedeposit_per_byte, s.g_selfdestruct) == (32000, 21000, 200, 5000)
    assert (s.g_txdata_zero, s.g_txdata_nonzero) == (4, 68)


# ---- decoder

def test_decode_push1():
    [i] = decode(bytes([0x60, 0x01]))
    assert (i.offset, i.mnemonic, i.immediate, i.truncated) == (0, "PUSH1", b"\x01", False)
    assert str(i) == "0000  PUSH1 0x01"


def test_decode_empty():
    assert decode(b"") == []


def test_decode_truncated_push():
    [i] = decode(bytes([0x60]))
    assert i.truncated and i.immediate == b""
    assert i.padded_immediate == b"\x00"
    [j] = decode(bytes([0x62, 0xAA]))
    assert j.truncated and j.padded_immediate == b"\xaa\x00\x00"


def test_push_immediate_not_decoded_as_opcode():
    ins = decode(bytes([0x61, 0x5B, 0x5B, 0x5B]))
    assert [i.mnemonic for i in ins] == ["PUSH2", "JUMPDEST"]
    assert [i.offset for i in ins] == [0, 3]


def test_unknown_opcode_is_invalid():
    [i] = decode(bytes([0x0C]))
    assert i.mnemonic == "INVALID" and i.base_gas is None


@settings(max_examples=2000)
@given(st.binary(max_size=300))
def test_decoder_total_and_contiguous(code):
    ins = decode(code)
    assert sum(i.size for i in ins) == len(code)
    pos = 0
    for i in ins:
        assert i.offset == pos
        pos += i.size


def test_parse_hex():
    assert parse_hex("0x60 01\n") == b"\x60\x01"
    assert parse_hex(b"6001") == b"\x60\x01"
    with pytest.raises(GasError):
        parse_hex("0xzz")


# ---- deployment gas

def test_runtime_len_100():
    d = deployment_gas(ContractBytecode(runtime_len_override=100))
    assert d.total == 21000 + 32000 + 20000 == 73000


def test_empty_constructor():
    assert deployment_gas(ContractBytecode(runtime_code=b"")).total == 53000


def test_missing_runtime_len_warns_or_errors():
    d = deployment_gas(ContractBytecode(init_code=b"\x00"))
    assert d.codedeposit == 0 and d.warnings
    with pytest.raises(GasError):
        deployment_gas(ContractBytecode(init_code=b"\x00"), opts=EstimationOptions(strict=True))


def test_runtime_code_beats_override():
    c = ContractBytecode(runtime_code=b"\x00" * 7, runtime_len_override=100)
    assert c.runtime_len == 7


def test_calldata_toggle():
    code = bytes([0x00, 0x00, 0x60, 0x01])
    assert calldata_gas(code) == 2 * 4 + 2 * 68
    c = ContractBytecode(init_code=code, runtime_code=b"")
    assert deployment_gas(c).calldata == 0
    assert deployment_gas(c, opts=EstimationOptions(include_calldata=True)).calldata == 144


def test_static_sum_push_push_add():
    ins = decode(bytes([0x60, 0x01, 0x60, 0x02, 0x01]))
    e = execution_cost(ins, ExecutionStrategy.static_sum, DEFAULT_SCHEDULE)
    assert e.gas == 9 and e.lower_bound


def test_static_sum_counts_unknown():
    ins = decode(bytes([0x0C, 0x55, 0x01]))  # undefined, SSTORE (dynamic), ADD
    e = execution_cost(ins, ExecutionStrategy.static_sum, DEFAULT_SCHEDULE)
    assert e.gas == 3 and e.unknown_opcode_count == 2


def test_execution_strategies():
    assert execution_cost([], ExecutionStrategy.zero, DEFAULT_SCHEDULE).gas == 0
    assert execution_cost([], ExecutionStrategy.provided, DEFAULT_SCHEDULE, 5321).gas == 5321
    with pytest.raises(GasError):
        execution_cost([], ExecutionStrategy.provided, DEFAULT_SCHEDULE, -1)
    with pytest.raises(GasError):
        execution_cost([], ExecutionStrategy.provided, DEFAULT_SCHEDULE, None)


def test_update_gas():
    assert update_gas(UpdatePattern.selfdestruct()) == 5000
    assert update_gas(UpdatePattern.proxy(26000)) == 26000
    assert update_gas(UpdatePattern(), load_gas_schedule({"g_selfdestruct": 0})) == 0
    with pytest.raises(GasError):
        update_gas(UpdatePattern.proxy(None))
    with pytest.raises(GasError):
        UpdatePattern("upgrade")


# ---- principal and fees

def test_principal_ceothrone_figure():
    q = static_quote(126, 500)
    p = principal(None, DEFAULT_SCHEDULE, EstimationOptions(), q, deploy_gas_override=892200)
    assert p.total_gas == 897200
    assert p.fee_eth == Decimal("0.1130472")
    assert p.fee_usd == Decimal("56.5236")
    assert dict(p.breakdown) == {"measured": 892200, "update": 5000}


def test_principal_zero_cases():
    c = ContractBytecode(runtime_len_override=100)
    p = principal(c, DEFAULT_SCHEDULE, EstimationOptions(), static_quote(0, 500))
    assert p.fee_eth == 0 and p.fee_usd == 0 and p.total_gas == 78000


def test_principal_needs_input():
    with pytest.raises(GasError):
        principal(None, DEFAULT_SCHEDULE, EstimationOptions(), static_quote(1, 1))


@settings(max_examples=300)
@given(st.integers(0, 50000), st.integers(0, 10**6), st.booleans(),
       st.sampled_from(list(ExecutionStrategy)), st.binary(max_size=64))
def test_breakdown_sums(rlen, provided, calldata, strategy, init):
    opts = EstimationOptions(include_calldata=calldata, execution=strategy, provided_execution_gas=provided)
    c = ContractBytecode(init_code=init, runtime_len_override=rlen)
    p = principal(c, DEFAULT_SCHEDULE, opts, static_quote(1, 1))
    parts = dict(p.breakdown)
    upd = parts.pop("update")
    assert sum(parts.values()) == p.deploy_gas
    assert p.total_gas == p.deploy_gas + upd
    assert isinstance(p.total_gas, int)


@given(st.integers(0, 10**5), st.integers(0, 10**5))
def test_deploy_gas_monotone_in_runtime_len(a, b):
    lo, hi = sorted((a, b))
    assert deployment_gas(ContractBytecode(runtime_len_override=lo)).total <= \
        deployment_gas(ContractBytecode(runtime_len_override=hi)).total


@given(st.binary(max_size=100), st.binary(max_size=20))
def test_static_sum_monotone_under_append(code, extra):
    def cost(b):
        return execution_cost(decode(b), ExecutionStrategy.static_sum, DEFAULT_SCHEDULE).gas
    # appending whole instructions: extend after a complete decode of `code`
    padded = code + b"\x00" * 32
    assert cost(padded) <= cost(padded + extra)


@given(st.integers(0, 10**7), st.sampled_from(["1", "126", "0.5", "33.3"]),
       st.sampled_from(["500", "1", "2500.75"]))
def test_gas_quote_independent(gas, g, usd):
    c = ContractBytecode(runtime_len_override=gas % 5000)
    a = principal(c, DEFAULT_SCHEDULE, EstimationOptions(), static_quote(g, usd))
    b = principal(c, DEFAULT_SCHEDULE, EstimationOptions(), static_quote(126, 500))
    assert a.total_gas == b.total_gas and dict(a.breakdown) == dict(b.breakdown)


# ---- schedule loading

def test_schedule_override(tmp_path):
    p = tmp_path / "s.yaml"
    p.write_text("g_create: 1\nopcode_base_cost: {ADD: 7, '0x54': 2100, SSTORE: 5000}\n")
    s = load_gas_schedule(p)
    assert s.g_create == 1 and s.g_transaction == 21000
    assert s.base_gas(0x01) == 7 and s.base_gas(0x54) == 2100 and s.base_gas(0x55) == 5000


@pytest.mark.parametrize("doc", [
    {"g_bogus": 1},
    {"g_create": -1},
    {"opcode_base_cost": {"NOPE": 1}},
    {"opcode_base_cost": {"0x1ff": 1}},
    {"opcode_base_cost": {"ADD": -2}},
])
def test_bad_schedules(doc):
    with pytest.raises(GasError):
        load_gas_schedule(doc)


def test_from_files(tmp_path):
    (tmp_path / "i.hex").write_text("0x6001\n")
    (tmp_path / "r.hex").write_text("00 00 00")
    c = ContractBytecode.from_files(tmp_path / "i.hex", tmp_path / "r.hex")
    assert c.init_code == b"\x60\x01" and c.runtime_len == 3
