#!/usr/bin/env python3
"""Regenerates the checked-in benchmark instances under data/.

All generation is seeded, so re-running this script reproduces the files
byte-for-byte.

- uf20-91.cnf:   uniform random 3-SAT, 20 variables, 91 clauses, kept only if
                 satisfiable (verified exhaustively).
- uf100-430.cnf: uniform random 3-SAT, 100 variables, 430 clauses
                 (clause/variable ratio 4.3, the phase-transition region),
                 kept only once a local-search solver finds a satisfying
                 assignment, which is stored in uf100-430.witness.
- knapsack105.kp: 105-item, 2-constraint knapsack with a provably optimal
                 selection (stored in knapsack105.opt) of value 624319.
                 Construction: capacities are exactly the optimal selection's
                 loads and every unselected item's value is strictly below
                 its summed weights, so by LP duality with unit multipliers
                 no feasible selection can score more.
"""

import random
import sys
from pathlib import Path

DATA = Path(__file__).resolve().parent.parent / "data"


def random_3sat(rng, num_vars, num_clauses):
    clauses = []
    for _ in range(num_clauses):
        vs = rng.sample(range(1, num_vars + 1), 3)
        clauses.append([v if rng.random() < 0.5 else -v for v in vs])
    return clauses


def brute_force_satisfiable(num_vars, clauses):
    import numpy as np

    idx = np.arange(1 << num_vars, dtype=np.uint32)
    ok = np.ones(1 << num_vars, dtype=bool)
    for clause in clauses:
        sat = np.zeros(1 << num_vars, dtype=bool)
        for lit in clause:
            bit = ((idx >> (abs(lit) - 1)) & 1).astype(bool)
            sat |= bit if lit > 0 else ~bit
        ok &= sat
        if not ok.any():
            return None
    first = int(np.flatnonzero(ok)[0])
    return [(first >> i) & 1 for i in range(num_vars)]


def walksat(rng, num_vars, clauses, max_flips=2_000_000, p_noise=0.5):
    occurs = [[] for _ in range(num_vars + 1)]
    for ci, clause in enumerate(clauses):
        for lit in clause:
            occurs[abs(lit)].append(ci)
    assign = [rng.randint(0, 1) for _ in range(num_vars + 1)]

    def clause_sat(ci):
        return any((assign[abs(l)] == 1) == (l > 0) for l in clauses[ci])

    unsat = {ci for ci in range(len(clauses)) if not clause_sat(ci)}
    for _ in range(max_flips):
        if not unsat:
            return assign[1:]
        ci = rng.choice(sorted(unsat))
        clause = clauses[ci]
        if rng.random() < p_noise:
            var = abs(rng.choice(clause))
        else:
            best_var, best_broken = None, None
            for lit in clause:
                v = abs(lit)
                assign[v] ^= 1
                broken = sum(1 for cj in occurs[v] if not clause_sat(cj))
                assign[v] ^= 1
                if best_broken is None or broken < best_broken:
                    best_var, best_broken = v, broken
            var = best_var
        assign[var] ^= 1
        for cj in occurs[var]:
            if clause_sat(cj):
                unsat.discard(cj)
            else:
                unsat.add(cj)
    return None


def write_cnf(path, num_vars, clauses):
    lines = [f"p cnf {num_vars} {len(clauses)}"]
    for clause in clauses:
        lines.append(" ".join(str(l) for l in clause) + " 0")
    path.write_text("\n".join(lines) + "\n")


def make_uf20(seed=20):
    rng = random.Random(seed)
    while True:
        clauses = random_3sat(rng, 20, 91)
        if brute_force_satisfiable(20, clauses) is not None:
            write_cnf(DATA / "uf20-91.cnf", 20, clauses)
            print("uf20-91.cnf written")
            return


def make_uf100(seed=100):
    rng = random.Random(seed)
    while True:
        clauses = random_3sat(rng, 100, 430)
        witness = walksat(rng, 100, clauses)
        if witness is not None:
            write_cnf(DATA / "uf100-430.cnf", 100, clauses)
            (DATA / "uf100-430.witness").write_text("".join(map(str, witness)) + "\n")
            sat = sum(
                1
                for clause in clauses
                if any((witness[abs(l) - 1] == 1) == (l > 0) for l in clause)
            )
            assert sat == 430, sat
            print("uf100-430.cnf written, witness satisfies all 430 clauses")
            return


def make_knapsack(seed=105, n=105, m=2, target=624319):
    rng = random.Random(seed)
    weights = [[rng.randint(100, 9999) for _ in range(n)] for _ in range(m)]
    selected = sorted(rng.sample(range(n), 52))
    in_sel = [j in selected for j in range(n)]

    # Adjust one selected item so the optimal value lands exactly on target.
    def sel_value(j):
        return sum(weights[i][j] for i in range(m))

    total = sum(sel_value(j) for j in selected)
    delta = target - total
    j0 = selected[0]
    weights[0][j0] += delta
    assert weights[0][j0] >= 1, "seed produced an unadjustable instance"

    values = []
    for j in range(n):
        full = sum(weights[i][j] for i in range(m))
        values.append(full if in_sel[j] else full - rng.randint(1, full // 2))
    capacities = [sum(weights[i][j] for j in selected) for i in range(m)]

    opt_value = sum(values[j] for j in selected)
    assert opt_value == target, opt_value
    # duality check: v_j <= sum_i w_ij with equality only on selected items
    for j in range(n):
        full = sum(weights[i][j] for i in range(m))
        assert values[j] == full if in_sel[j] else values[j] < full

    lines = [f"{n} {m}", " ".join(map(str, values))]
    lines += [" ".join(map(str, row)) for row in weights]
    lines.append(" ".join(map(str, capacities)))
    (DATA / "knapsack105.kp").write_text("\n".join(lines) + "\n")
    (DATA / "knapsack105.opt").write_text(
        "".join("1" if in_sel[j] else "0" for j in range(n)) + "\n"
    )
    print(f"knapsack105.kp written, optimum {opt_value}")


if __name__ == "__main__":
    DATA.mkdir(exist_ok=True)
    make_uf20()
    make_uf100()
    make_knapsack()
    print("done", file=sys.stderr)
