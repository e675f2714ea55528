"""EVM opcode table with static base gas costs.

Costs follow the fee schedule tiers of the Ethereum yellow paper (Appendix G),
Petersburg-era values. ``None`` marks opcodes whose cost is purely dynamic
(SSTORE) or undefined (INVALID); static estimation treats those as 0.
"""

from __future__ import annotations

# tiers
ZERO, BASE, VERYLOW, LOW, MID, HIGH = 0, 2, 3, 5, 8, 10

_TABLE: dict[int, tuple[str, int | None]] = {
    0x00: ("STOP", ZERO),
    0x01: ("ADD", VERYLOW),
    0x02: ("MUL", LOW),
    0x03: ("SUB", VERYLOW),
    0x04: ("DIV", LOW),
    0x05: ("SDIV", LOW),
    0x06: ("MOD", LOW),
    0x07: ("SMOD", LOW),
    0x08: ("ADDMOD", MID),
    0x09: ("MULMOD", MID),
    0x0A: ("EXP", 10),
    0x0B: ("SIGNEXTEND", LOW),
    0x10: ("LT", VERYLOW),
    0x11: ("GT", VERYLOW),
    0x12: ("SLT", VERYLOW),
    0x13: ("SGT", VERYLOW),
    0x14: ("EQ", VERYLOW),
    0x15: ("ISZERO", VERYLOW),
    0x16: ("AND", VERYLOW),
    0x17: ("OR", VERYLOW),
    0x18: ("XOR", VERYLOW),
    0x19: ("NOT", VERYLOW),
    0x1A: ("BYTE", VERYLOW),
    0x1B: ("SHL", VERYLOW),
    0x1C: ("SHR", VERYLOW),
    0x1D: ("SAR", VERYLOW),
    0x20: ("SHA3", 30),
    0x30: ("ADDRESS", BASE),
    0x31: ("BALANCE", 400),
    0x32: ("ORIGIN", BASE),
    0x33: ("CALLER", BASE),
    0x34: ("CALLVALUE", BASE),
    0x35: ("CALLDATALOAD", VERYLOW),
    0x36: ("CALLDATASIZE", BASE),
    0x37: ("CALLDATACOPY", VERYLOW),
    0x38: ("CODESIZE", BASE),
    0x39: ("CODECOPY", VERYLOW),
    0x3A: ("GASPRICE", BASE),
    0x3B: ("EXTCODESIZE", 700),
    0x3C: ("EXTCODECOPY", 700),
    0x3D: ("RETURNDATASIZE", BASE),
    0x3E: ("RETURNDATACOPY", VERYLOW),
    0x3F: ("EXTCODEHASH", 400),
    0x40: ("BLOCKHASH", 20),
    0x41: ("COINBASE", BASE),
    0x42: ("TIMESTAMP", BASE),
    0x43: ("NUMBER", BASE),
    0x44: ("DIFFICULTY", BASE),
    0x45: ("GASLIMIT", BASE),
    0x46: ("CHAINID", BASE),
    0x47: ("SELFBALANCE", LOW),
    0x48: ("BASEFEE", BASE),
    0x50: ("POP", BASE),
    0x51: ("MLOAD", VERYLOW),
    0x52: ("MSTORE", VERYLOW),
    0x53: ("MSTORE8", VERYLOW),
    0x54: ("SLOAD", 200),
    0x55: ("SSTORE", None),
    0x56: ("JUMP", MID),
    0x57: ("JUMPI", HIGH),
    0x58: ("PC", BASE),
    0x59: ("MSIZE", BASE),
    0x5A: ("GAS", BASE),
    0x5B: ("JUMPDEST", 1),
    0x5F: ("PUSH0", BASE),
    0xF0: ("CREATE", 32000),
    0xF1: ("CALL", 700),
    0xF2: ("CALLCODE", 700),
    0xF3: ("RETURN", ZERO),
    0xF4: ("DELEGATECALL", 700),
    0xF5: ("CREATE2", 32000),
    0xFA: ("STATICCALL", 700),
    0xFD: ("REVERT", ZERO),
    0xFE: ("INVALID", None),
    0xFF: ("SELFDESTRUCT", 5000),
}
for _n in range(1, 33):
    _TABLE[0x5F + _n] = (f"PUSH{_n}", VERYLOW)
for _n in range(1, 17):
    _TABLE[0x7F + _n] = (f"DUP{_n}", VERYLOW)
    _TABLE[0x8F + _n] = (f"SWAP{_n}", VERYLOW)
for _n in range(5):
    _TABLE[0xA0 + _n] = (f"LOG{_n}", 375 + 375 * _n)

MNEMONICS: dict[int, str] = {op: name for op, (name, _) in _TABLE.items()}
OPCODES: dict[str, int] = {name: op for op, name in MNEMONICS.items()}
BASE_COSTS: dict[int, int | None] = {op: cost for op, (_, cost) in _TABLE.items()}


def push_size(opcode: int) -> int:
    """Immediate byte count for PUSH1..PUSH32, else 0."""
    return opcode - 0x5F if 0x60 <= opcode <= 0x7F else 0


def mnemonic(opcode: int) -> str:
    return MNEMONICS.get(opcode, "INVALID")
