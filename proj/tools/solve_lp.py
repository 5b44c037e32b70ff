#!/usr/bin/env python3
"""Reference MILP solver driver.

Reads LP-format model files (the subset written by `slmopt export-milp`),
solves them with HiGHS through scipy.optimize.milp, and writes solution files
in the whitespace-separated "name value" format that `slmopt import-solution`
accepts. Infeasible models produce a file containing only "# infeasible".

Usage: solve_lp.py model1.lp out1.sol [model2.lp out2.sol ...]
"""

import sys

import numpy as np
from scipy.optimize import Bounds, LinearConstraint, milp
from scipy.sparse import lil_matrix


def tokenize(text):
    tokens = []
    for raw in text.splitlines():
        line = raw.split("\\", 1)[0]
        tokens.extend(line.split())
    return tokens


SECTION_STARTS = {
    "minimize": "objective",
    "maximize": "objective",
    "subject": "constraints",
    "st": "constraints",
    "s.t.": "constraints",
    "bounds": "bounds",
    "binaries": "binaries",
    "binary": "binaries",
    "generals": "generals",
    "general": "generals",
    "end": "end",
}


def split_sections(tokens):
    sections = {}
    current = None
    i = 0
    while i < len(tokens):
        low = tokens[i].lower()
        if low in SECTION_STARTS:
            name = SECTION_STARTS[low]
            if low == "subject":  # consume the "To"
                i += 1
            current = name
            sections[current] = []
            i += 1
            continue
        if current is None:
            raise ValueError(f"token outside any section: {tokens[i]}")
        sections[current].append(tokens[i])
        i += 1
    return sections


def is_number(tok):
    try:
        float(tok)
        return True
    except ValueError:
        return False


class Expression:
    """Accumulates `sign coef name` sequences into {name: coef}."""

    def __init__(self):
        self.coefs = {}

    def feed(self, tokens):
        sign = 1.0
        coef = None
        for tok in tokens:
            if tok == "+":
                continue
            if tok == "-":
                sign = -sign
                continue
            if is_number(tok):
                coef = float(tok) if coef is None else coef * float(tok)
                continue
            value = sign * (1.0 if coef is None else coef)
            self.coefs[tok] = self.coefs.get(tok, 0.0) + value
            sign, coef = 1.0, None


def parse_constraints(tokens):
    """Yields (name, {var: coef}, sense, rhs)."""
    out = []
    i = 0
    while i < len(tokens):
        tok = tokens[i]
        if not tok.endswith(":"):
            raise ValueError(f"expected a constraint label, got {tok}")
        name = tok[:-1]
        i += 1
        expr_tokens = []
        sense = None
        while i < len(tokens):
            if tokens[i] in ("<=", ">=", "=", "<", ">"):
                sense = tokens[i]
                i += 1
                break
            expr_tokens.append(tokens[i])
            i += 1
        if sense is None:
            raise ValueError(f"constraint {name} has no sense")
        rhs = float(tokens[i])
        i += 1
        expr = Expression()
        expr.feed(expr_tokens)
        out.append((name, expr.coefs, sense, rhs))
    return out


def parse_objective(tokens):
    if tokens and tokens[0].endswith(":"):
        tokens = tokens[1:]
    expr = Expression()
    expr.feed(tokens)
    return expr.coefs


def parse_bounds(tokens, lb, ub, index):
    i = 0
    while i < len(tokens):
        # forms: v <= c | v >= c | c <= v <= c | v = c | v free
        if is_number(tokens[i]):
            low = float(tokens[i])
            assert tokens[i + 1] in ("<=", "<")
            var = tokens[i + 2]
            assert tokens[i + 3] in ("<=", "<")
            high = float(tokens[i + 4])
            lb[index[var]] = low
            ub[index[var]] = high
            i += 5
        else:
            var = tokens[i]
            op = tokens[i + 1]
            if op.lower() == "free":
                lb[index[var]] = -np.inf
                ub[index[var]] = np.inf
                i += 2
                continue
            value = float(tokens[i + 2])
            if op in ("<=", "<"):
                ub[index[var]] = value
            elif op in (">=", ">"):
                lb[index[var]] = value
            else:
                lb[index[var]] = value
                ub[index[var]] = value
            i += 3
    return lb, ub


def solve_file(lp_path, sol_path):
    with open(lp_path) as f:
        text = f.read()
    sections = split_sections(tokenize(text))

    objective = parse_objective(sections.get("objective", []))
    constraints = parse_constraints(sections.get("constraints", []))
    binaries = set(sections.get("binaries", []))
    generals = set(sections.get("generals", []))

    names = []
    index = {}

    def touch(var):
        if var not in index:
            index[var] = len(names)
            names.append(var)

    for var in objective:
        touch(var)
    for _, coefs, _, _ in constraints:
        for var in coefs:
            touch(var)
    for var in binaries | generals:
        touch(var)

    n = len(names)
    lb = np.zeros(n)
    ub = np.full(n, np.inf)
    for var in binaries:
        ub[index[var]] = 1.0
    parse_bounds(sections.get("bounds", []), lb, ub, index)

    c = np.zeros(n)
    for var, coef in objective.items():
        c[index[var]] = coef

    m = len(constraints)
    A = lil_matrix((m, n))
    clb = np.full(m, -np.inf)
    cub = np.full(m, np.inf)
    for row, (_, coefs, sense, rhs) in enumerate(constraints):
        for var, coef in coefs.items():
            A[row, index[var]] = coef
        if sense in ("<=", "<"):
            cub[row] = rhs
        elif sense in (">=", ">"):
            clb[row] = rhs
        else:
            clb[row] = rhs
            cub[row] = rhs

    integrality = np.zeros(n)
    for var in binaries | generals:
        integrality[index[var]] = 1

    res = milp(
        c=c,
        constraints=LinearConstraint(A.tocsr(), clb, cub),
        integrality=integrality,
        bounds=Bounds(lb, ub),
        options={"mip_rel_gap": 0.0},
    )

    with open(sol_path, "w") as f:
        if res.status == 2:  # proven infeasible
            f.write("# infeasible\n")
            return "infeasible"
        if res.status != 0 or res.x is None:
            raise RuntimeError(f"{lp_path}: solver status {res.status}: {res.message}")
        f.write(f"# objective {float(res.fun)!r}\n")
        f.write(f"=obj= {float(res.fun)!r}\n")
        for var, value in zip(names, res.x):
            if abs(value) > 1e-11:
                f.write(f"{var} {float(value)!r}\n")
    return "optimal"


def main(argv):
    if len(argv) < 3 or len(argv) % 2 == 0:
        print(__doc__, file=sys.stderr)
        return 2
    for i in range(1, len(argv), 2):
        status = solve_file(argv[i], argv[i + 1])
        print(f"{argv[i]}: {status}")
    return 0


if __name__ == "__main__":
    sys.exit(main(sys.argv))
