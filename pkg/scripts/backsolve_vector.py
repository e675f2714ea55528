"""Find CWSS vectors whose total rounds to a target score.

Used to pick a defensible vector for a contract whose published interest
figure is known but whose vector is not (interest / (CAL x CLS) = CWSS).
Enumerates the three subscores independently, then combines them.

    python3 scripts/backsolve_vector.py --interest 228.9 --cal 6 --cls 0.5
"""

from __future__ import annotations

import argparse
import itertools
from decimal import ROUND_HALF_UP, Decimal

from contract_debt.cwss import FACTORS, CwssVector, default_weights, render_vector, score, subscores

# special codes (default, unknown, not applicable, quantified) are left out
_SKIP = {"D", "UK", "NA", "Q"}
GROUPS = {
    "base": ("TI", "AP", "AL", "IC", "FC"),
    "attack_surface": ("RP", "RL", "AV", "AS", "IN", "SC"),
    "environmental": ("BI", "DI", "EX", "EC", "P"),
}


def _group_values(w, group: str) -> dict[Decimal, dict[str, str]]:
    abbrevs = GROUPS[group]
    choices = [[c for c in w.codes(a) if c not in _SKIP and w.weight(a, c)] for a in abbrevs]
    neutral = {a: Decimal(1) for a, _, _ in FACTORS}
    idx = list(GROUPS).index(group)
    out: dict[Decimal, dict[str, str]] = {}
    for combo in itertools.product(*choices):
        wt = dict(neutral, **{a: w.weight(a, c) for a, c in zip(abbrevs, combo)})
        value = subscores(wt)[idx]
        out.setdefault(value, dict(zip(abbrevs, combo)))
    return out


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--interest", type=Decimal, required=True)
    ap.add_argument("--cal", type=Decimal, required=True)
    ap.add_argument("--cls", type=Decimal, required=True)
    ap.add_argument("--limit", type=int, default=10)
    args = ap.parse_args()

    target = (args.interest / (args.cal * args.cls)).quantize(Decimal("0.1"), rounding=ROUND_HALF_UP)
    print(f"target CWSS total: {target}")
    w = default_weights()
    base, attack, env = (_group_values(w, g) for g in GROUPS)
    hits = []
    for b, e in itertools.product(base, env):
        for a in attack:
            total = min(b * a * e, Decimal(100))
            if total.quantize(Decimal("0.1"), rounding=ROUND_HALF_UP) != target:
                continue
            if (total * args.cal * args.cls).quantize(Decimal("0.1"), rounding=ROUND_HALF_UP) != args.interest:
                continue
            hits.append((b, a, e))
    print(f"{len(hits)} subscore combinations reproduce {args.interest}")
    # prefer the strongest base (most severe technical reading) first
    for b, a, e in sorted(hits, key=lambda t: (-t[0], -t[1]))[: args.limit]:
        codes = {**base[b], **attack[a], **env[e]}
        v = CwssVector().with_codes(**codes)
        s = score(v, w)
        print(f"{s.total:.5f}  {render_vector(v)}")


if __name__ == "__main__":
    main()
