#!/usr/bin/env python3
"""Tradeoff-bound data for the qutrit preset and its parameter subsets.

Uses the trinomial closed form for the collective bound (valid at every
p at the symmetric point) plus the exact diagonal surrogate, and adds
the dense cross-check on small p.

  python3 scripts/qutrit_tradeoff_sweep.py --subsets qutrit8 qutrit:1,2,5 \
      --p-max 60 --output qutrit_sweep.csv
"""

from __future__ import annotations

import argparse
import csv

import numpy as np

from qmetro import bounds as gb
from qmetro.logderiv import sld_analysis
from qmetro.scenarios import (
    build_scenario,
    parse_scenario,
    qutrit_cp_closed,
    qutrit_tp_closed,
)
from qmetro.states import evaluate
from qmetro.tensor import build_collective, compute_cp


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument(
        "--subsets",
        nargs="+",
        default=["qutrit8", "qutrit:1,2,4,5", "qutrit:1,2,5", "qutrit:1,2"],
    )
    ap.add_argument("--p-max", type=int, default=60)
    ap.add_argument("--p-dense", type=int, default=4)
    ap.add_argument("--output", default="qutrit_sweep.csv")
    args = ap.parse_args()

    rows = []
    for preset in args.subsets:
        spec = parse_scenario(preset)
        family = build_scenario(spec)
        state = evaluate(family, np.zeros(family.n))
        _, _, tilde = sld_analysis(state)
        n = family.n
        for p in range(1, args.p_max + 1):
            rows.append((preset, p, "cp_closed", gb.cp_bound(qutrit_cp_closed(spec, p), n)))
            if p <= 12:
                rows.append(
                    (preset, p, "tp_closed", gb.tp_bound(qutrit_tp_closed(spec, p), n))
                )
        for p in range(1, args.p_dense + 1):
            cp = compute_cp(build_collective(state, tilde, p))
            rows.append((preset, p, "cp_dense", gb.cp_bound(cp, n)))
        rows.append((preset, "", "qcrb_holevo", float(n)))

    with open(args.output, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["preset", "p", "bound_name", "value"])
        for row in rows:
            writer.writerow([row[0], row[1], row[2], format(row[3], ".12g")])
    print(f"wrote {len(rows)} rows to {args.output}")


if __name__ == "__main__":
    main()
