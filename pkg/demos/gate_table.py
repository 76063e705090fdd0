"""Redundancy, union information and synergy for the standard logic gates.

Each row is one gate.  Redundancy is computed four ways so the measures can be
compared side by side; the union information and synergy come from the same
convex program.

    python demos/gate_table.py
"""

from pidstar import (
    broja_redundancy,
    generate_fixture,
    mutual_information,
    redundancy_gh,
    redundancy_star,
    redundancy_wedge,
    union_star,
)

GATES = ["and", "or", "xor", "sum", "copy", "unq(0.1)", "and3", "sum3", "overlap", "lemma1"]


def fmt(v: float) -> str:
    # solver noise around zero should not print as -0.0000
    return f"{v:.4f}" if abs(v) >= 5e-5 else "0.0000"


def row(name: str) -> list[str]:
    joint = generate_fixture(name)
    sources = [a.name for a in joint.sources]
    total = mutual_information(joint, "Y", sources)
    r = redundancy_star(joint)
    u = union_star(joint)
    wedge = redundancy_wedge(joint)
    gh = redundancy_gh(joint).value
    broja = broja_redundancy(joint) if len(sources) == 2 else None
    return [
        name,
        fmt(total),
        fmt(r.value),
        fmt(wedge),
        fmt(gh),
        "-" if broja is None else fmt(broja),
        fmt(u.value),
        fmt(total - u.value),
        str(r.effective_cardinality),
    ]


def main() -> None:
    header = ["gate", "I(Y;X)", "R*", "R^", "R_GH", "R_BROJA", "U*", "synergy", "|Q|"]
    rows = [header] + [row(g) for g in GATES]
    widths = [max(len(r[k]) for r in rows) for k in range(len(header))]
    for r in rows:
        print("  ".join(c.rjust(w) for c, w in zip(r, widths)))
    print()
    print("R* never exceeds the smallest I(Y;Xi), and R^ <= R_GH <= R* on every gate.")
    print("For two sources, R_BROJA + U* = I(Y;X1) + I(Y;X2) by construction.")


if __name__ == "__main__":
    main()
