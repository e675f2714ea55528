"""Bytecode decoding and redeployment gas (the debt principal).

Principal = deployment gas of the patched contract + gas of the update
pattern that retires the vulnerable one. Gas math is integer-only; fiat
conversion uses Decimal.
"""

from __future__ import annotations

import enum
import logging
from dataclasses import dataclass, field
from decimal import Decimal
from pathlib import Path
from types import MappingProxyType
from typing import Any, Mapping, Sequence

import yaml

from . import opcodes
from .pricing import PriceQuote

log = logging.getLogger(__name__)


class GasError(ValueError):
    pass


@dataclass(frozen=True)
class GasSchedule:
    g_create: int = 32000
    g_transaction: int = 21000
    g_codedeposit_per_byte: int = 200
    g_selfdestruct: int = 5000
    g_txdata_zero: int = 4
    g_txdata_nonzero: int = 68
    opcode_base_cost: Mapping[int, int | None] = field(
        default_factory=lambda: MappingProxyType(dict(opcodes.BASE_COSTS))
    )

    def __post_init__(self):
        for name in ("g_create", "g_transaction", "g_codedeposit_per_byte",
                     "g_selfdestruct", "g_txdata_zero", "g_txdata_nonzero"):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, int) or value < 0:
                raise GasError(f"{name} must be a non-negative integer, got {value!r}")
        for op, cost in self.opcode_base_cost.items():
            if cost is not None and (not isinstance(cost, int) or cost < 0):
                raise GasError(f"opcode 0x{op:02x}: cost must be a non-negative integer or null")

    def base_gas(self, opcode: int) -> int | None:
        return self.opcode_base_cost.get(opcode)


_SCHEDULE_KEYS = {
    "g_create", "g_transaction", "g_codedeposit_per_byte", "g_selfdestruct",
    "g_txdata_zero", "g_txdata_nonzero", "opcode_base_cost",
}


def load_gas_schedule(source: str | bytes | Path | Mapping[str, Any] | None) -> GasSchedule:
    """Defaults overlaid with a (partial) schedule document.

    ``opcode_base_cost`` keys may be mnemonics (``SLOAD``) or opcode bytes
    (``0x54``); values are gas or null for "unknown".
    """
    if isinstance(source, Path):
        source = source.read_bytes()
    doc = yaml.safe_load(source) if isinstance(source, (str, bytes)) else source
    doc = doc or {}
    if not isinstance(doc, Mapping):
        raise GasError("gas schedule must be a mapping")
    unknown = set(doc) - _SCHEDULE_KEYS
    if unknown:
        raise GasError(f"unknown gas schedule field(s) {sorted(unknown)}")
    table = dict(opcodes.BASE_COSTS)
    for key, cost in (doc.get("opcode_base_cost") or {}).items():
        if isinstance(key, int):
            op = key
        elif isinstance(key, str) and key.lower().startswith("0x"):
            op = int(key, 16)
        elif isinstance(key, str) and key.upper() in opcodes.OPCODES:
            op = opcodes.OPCODES[key.upper()]
        else:
            raise GasError(f"unknown opcode {key!r} in gas schedule")
        if not 0 <= op <= 0xFF:
            raise GasError(f"opcode {key!r} out of range")
        table[op] = cost
    scalars = {k: v for k, v in doc.items() if k != "opcode_base_cost"}
    return GasSchedule(**scalars, opcode_base_cost=MappingProxyType(table))


DEFAULT_SCHEDULE = GasSchedule()


# ---------------------------------------------------------------- decoding

@dataclass(frozen=True)
class Instruction:
    offset: int
    opcode: int
    mnemonic: str
    immediate: bytes = b""
    base_gas: int | None = None
    truncated: bool = False

    @property
    def size(self) -> int:
        return 1 + len(self.immediate)

    @property
    def padded_immediate(self) -> bytes:
        """Immediate as the EVM sees it: zero-padded past end of code."""
        n = opcodes.push_size(self.opcode)
        return self.immediate + b"\x00" * (n - len(self.immediate))

    def __str__(self) -> str:
        if opcodes.push_size(self.opcode):
            return f"{self.offset:04x}  {self.mnemonic} 0x{self.padded_immediate.hex()}"
        return f"{self.offset:04x}  {self.mnemonic}"


def decode(code: bytes, schedule: GasSchedule = DEFAULT_SCHEDULE) -> list[Instruction]:
    """Linear-sweep disassembly. Total: every byte string decodes."""
    out: list[Instruction] = []
    pc = 0
    n = len(code)
    while pc < n:
        op = code[pc]
        width = opcodes.push_size(op)
        imm = bytes(code[pc + 1 : pc + 1 + width])
        out.append(Instruction(
            offset=pc,
            opcode=op,
            mnemonic=opcodes.mnemonic(op),
            immediate=imm,
            base_gas=schedule.base_gas(op),
            truncated=len(imm) < width,
        ))
        pc += 1 + len(imm)
    return out


def parse_hex(text: str | bytes) -> bytes:
    """Hex text to bytes; tolerates a 0x prefix and whitespace."""
    if isinstance(text, bytes):
        text = text.decode("ascii", errors="replace")
    cleaned = "".join(text.split())
    if cleaned[:2].lower() == "0x":
        cleaned = cleaned[2:]
    try:
        return bytes.fromhex(cleaned)
    except ValueError as exc:
        raise GasError(f"invalid hex bytecode: {exc}") from None


# ---------------------------------------------------------------- estimation

class ExecutionStrategy(enum.Enum):
    zero = "zero"
    static_sum = "static_sum"
    provided = "provided"


@dataclass(frozen=True)
class ContractBytecode:
    init_code: bytes = b""
    runtime_code: bytes | None = None
    runtime_len_override: int | None = None

    @property
    def runtime_len(self) -> int | None:
        if self.runtime_code is not None:
            return len(self.runtime_code)
        return self.runtime_len_override

    @classmethod
    def from_files(cls, init_code: Path | None = None, runtime_code: Path | None = None,
                   runtime_len: int | None = None) -> "ContractBytecode":
        return cls(
            init_code=parse_hex(Path(init_code).read_text()) if init_code else b"",
            runtime_code=parse_hex(Path(runtime_code).read_text()) if runtime_code else None,
            runtime_len_override=runtime_len,
        )


@dataclass(frozen=True)
class EstimationOptions:
    include_calldata: bool = False
    execution: ExecutionStrategy = ExecutionStrategy.zero
    provided_execution_gas: int | None = None
    strict: bool = False


@dataclass(frozen=True)
class ExecutionCost:
    gas: int
    strategy: ExecutionStrategy
    unknown_opcode_count: int = 0
    # static_sum ignores control flow and dynamic costs
    lower_bound: bool = False


def execution_cost(
    instructions: Sequence[Instruction],
    strategy: ExecutionStrategy,
    schedule: GasSchedule = DEFAULT_SCHEDULE,
    provided: int | None = None,
) -> ExecutionCost:
    if strategy is ExecutionStrategy.zero:
        return ExecutionCost(0, strategy)
    if strategy is ExecutionStrategy.provided:
        if provided is None or isinstance(provided, bool) or not isinstance(provided, int):
            raise GasError("provided execution strategy needs an integer gas value")
        if provided < 0:
            raise GasError(f"provided execution gas must be non-negative, got {provided}")
        return ExecutionCost(provided, strategy)
    gas = 0
    unknown = 0
    for ins in instructions:
        cost = ins.base_gas if ins.base_gas is not None else schedule.base_gas(ins.opcode)
        if cost is None:
            unknown += 1
        else:
            gas += cost
    return ExecutionCost(gas, strategy, unknown_opcode_count=unknown, lower_bound=True)


def calldata_gas(data: bytes, schedule: GasSchedule = DEFAULT_SCHEDULE) -> int:
    zeros = data.count(0)
    return zeros * schedule.g_txdata_zero + (len(data) - zeros) * schedule.g_txdata_nonzero


@dataclass(frozen=True)
class DeployGas:
    create: int
    transaction: int
    codedeposit: int
    calldata: int
    execution: int
    unknown_opcode_count: int = 0
    execution_lower_bound: bool = False
    warnings: tuple[str, ...] = ()

    @property
    def total(self) -> int:
        return self.create + self.transaction + self.codedeposit + self.calldata + self.execution

    def components(self) -> dict[str, int]:
        return {
            "create": self.create,
            "transaction": self.transaction,
            "codedeposit": self.codedeposit,
            "calldata": self.calldata,
            "execution": self.execution,
        }


def deployment_gas(
    c: ContractBytecode,
    schedule: GasSchedule = DEFAULT_SCHEDULE,
    opts: EstimationOptions = EstimationOptions(),
) -> DeployGas:
    warnings: list[str] = []
    runtime_len = c.runtime_len
    if runtime_len is None:
        if opts.strict:
            raise GasError("runtime code length unknown (give runtime code or a length)")
        msg = "runtime code length unknown; code deposit counted as 0"
        log.warning(msg)
        warnings.append(msg)
        runtime_len = 0
    if runtime_len < 0:
        raise GasError("runtime length must be non-negative")
    instructions = decode(c.init_code, schedule) if opts.execution is ExecutionStrategy.static_sum else []
    exe = execution_cost(instructions, opts.execution, schedule, opts.provided_execution_gas)
    return DeployGas(
        create=schedule.g_create,
        transaction=schedule.g_transaction,
        codedeposit=schedule.g_codedeposit_per_byte * runtime_len,
        calldata=calldata_gas(c.init_code, schedule) if opts.include_calldata else 0,
        execution=exe.gas,
        unknown_opcode_count=exe.unknown_opcode_count,
        execution_lower_bound=exe.lower_bound,
        warnings=tuple(warnings),
    )


@dataclass(frozen=True)
class UpdatePattern:
    kind: str = "selfdestruct"
    proxy_gas: int | None = None

    def __post_init__(self):
        if self.kind not in ("selfdestruct", "proxy"):
            raise GasError(f"unknown update pattern {self.kind!r}")

    @classmethod
    def selfdestruct(cls) -> "UpdatePattern":
        return cls("selfdestruct")

    @classmethod
    def proxy(cls, gas: int | None) -> "UpdatePattern":
        return cls("proxy", gas)


def update_gas(pattern: UpdatePattern, schedule: GasSchedule = DEFAULT_SCHEDULE) -> int:
    if pattern.kind == "selfdestruct":
        return schedule.g_selfdestruct
    if pattern.proxy_gas is None:
        raise GasError("proxy update pattern needs a configured gas figure")
    if pattern.proxy_gas < 0:
        raise GasError("proxy gas must be non-negative")
    return pattern.proxy_gas


GWEI = Decimal("1e-9")


@dataclass(frozen=True)
class PrincipalEstimate:
    deploy_gas: int
    update_gas: int
    breakdown: Mapping[str, int]
    fee_eth: Decimal
    fee_usd: Decimal
    quote_used: PriceQuote
    update_pattern: str = "selfdestruct"
    execution_lower_bound: bool = False
    unknown_opcode_count: int = 0
    warnings: tuple[str, ...] = ()

    @property
    def total_gas(self) -> int:
        return self.deploy_gas + self.update_gas


def fees(total_gas: int, quote: PriceQuote) -> tuple[Decimal, Decimal]:
    """(fee_eth, fee_usd), exact: gas x gwei x 1e-9, then x ETH/USD."""
    fee_eth = Decimal(total_gas) * quote.gas_price_gwei * GWEI
    return fee_eth, fee_eth * quote.eth_usd


def principal(
    c: ContractBytecode | None,
    schedule: GasSchedule,
    opts: EstimationOptions,
    quote: PriceQuote,
    update: UpdatePattern = UpdatePattern(),
    deploy_gas_override: int | None = None,
) -> PrincipalEstimate:
    """Gas and fiat cost of redeploying the patched contract plus its update.

    ``deploy_gas_override`` replaces bytecode estimation with a measured
    deployment figure (reported as the ``measured`` component).
    """
    if deploy_gas_override is not None:
        if deploy_gas_override < 0:
            raise GasError("deploy gas override must be non-negative")
        breakdown = {"measured": deploy_gas_override}
        deploy = DeployGas(0, 0, 0, 0, 0)
        deploy_total = deploy_gas_override
    else:
        if c is None:
            raise GasError("no bytecode and no deploy gas override")
        deploy = deployment_gas(c, schedule, opts)
        breakdown = deploy.components()
        deploy_total = deploy.total
    upd = update_gas(update, schedule)
    breakdown = dict(breakdown, update=upd)
    fee_eth, fee_usd = fees(deploy_total + upd, quote)
    return PrincipalEstimate(
        deploy_gas=deploy_total,
        update_gas=upd,
        breakdown=MappingProxyType(breakdown),
        fee_eth=fee_eth,
        fee_usd=fee_usd,
        quote_used=quote,
        update_pattern=update.kind,
        execution_lower_bound=deploy.execution_lower_bound,
        unknown_opcode_count=deploy.unknown_opcode_count,
        warnings=deploy.warnings,
    )
