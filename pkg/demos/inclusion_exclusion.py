"""Redundancy and union information are not tied by inclusion-exclusion.

Two small constructions:

* three pairwise independent bits with X3 = X1 XOR X2 and Y = (X1, X2, X3);
  inclusion-exclusion over the redundancy lattice predicts 3 bits of union
  information, but Y only carries 2 bits in total;
* a COPY target over two correlated bits, where the two-source identity
  R + U = I(Y;X1) + I(Y;X2) misses by more than the sources' shared information.

    python demos/inclusion_exclusion.py
"""

import itertools

from pidstar import (
    Alphabet,
    JointDistribution,
    generate_fixture,
    marginalize,
    mutual_information,
    redundancy_star,
    union_star,
)


def xor_triple() -> None:
    joint = generate_fixture("lemma1")
    names = [a.name for a in joint.sources]
    single = sum(mutual_information(joint, "Y", n) for n in names)
    pairs = {
        (a, b): redundancy_star(marginalize(joint, ["Y", a, b])).value for a, b in itertools.combinations(names, 2)
    }
    triple = redundancy_star(joint).value
    predicted = single - sum(pairs.values()) + triple
    print("XOR triple")
    print(f"  sum of I(Y;Xi)            {single:.4f}")
    for (a, b), v in pairs.items():
        print(f"  R*({a};{b})                 {v:.4f}")
    print(f"  R*(X1;X2;X3)              {triple:.4f}")
    print(f"  inclusion-exclusion union {predicted:.4f}")
    print(f"  U*                        {union_star(joint).value:.4f}")
    print(f"  I(Y;X1,X2,X3)             {mutual_information(joint, 'Y', names):.4f}\n")


def correlated_copy() -> None:
    alphs = [Alphabet("Y", ("00", "01", "10", "11")), Alphabet("X1", ("0", "1")), Alphabet("X2", ("0", "1"))]
    joint = JointDistribution.from_outcomes(
        alphs,
        {("00", "0", "0"): "3/8", ("01", "0", "1"): "1/8", ("10", "1", "0"): "1/8", ("11", "1", "1"): "3/8"},
    )
    r = redundancy_star(joint).value
    u = union_star(joint).value
    mi = mutual_information(joint, "Y", "X1") + mutual_information(joint, "Y", "X2")
    shared = mutual_information(joint, "X1", "X2")
    print("COPY of two correlated bits")
    print(f"  I(X1;X2)                  {shared:.4f}")
    print(f"  R* + U*                   {r + u:.4f}")
    print(f"  I(Y;X1) + I(Y;X2)         {mi:.4f}")
    print(f"  mismatch                  {mi - r - u:.4f}")


if __name__ == "__main__":
    xor_triple()
    correlated_copy()
