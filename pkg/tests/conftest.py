from pathlib import Path

import pytest

from contract_debt.catalog import default_catalog
from contract_debt.pricing import static_quote

BENCH = Path(__file__).parent / "fixtures" / "benchmark"


@pytest.fixture(scope="session")
def catalog():
    return default_catalog()


@pytest.fixture
def quote():
    return static_quote(126, 500)


@pytest.fixture(scope="session")
def bench_dir():
    return BENCH


def bench_args(out: Path | None = None, extra=()):
    args = [
        "assess",
        "--portfolio", str(BENCH / "portfolio.yaml"),
        "--findings", *sorted(str(p) for p in (BENCH / "findings").glob("*.json")),
        "--manual", str(BENCH / "manual.json"),
        "--quote", str(BENCH / "quote.yaml"),
        "--jobs", "4",
    ]
    if out is not None:
        args += ["--out", str(out)]
    return args + list(extra)
