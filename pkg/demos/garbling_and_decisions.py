"""When is one noisy channel a degraded copy of another?

Two binary symmetric channels are compared.  The exact garbling test returns a
witness channel; random decision problems confirm that the garbled channel is
never more useful, and a separating problem shows up when the relation fails.

    python demos/garbling_and_decisions.py
"""

from fractions import Fraction

from pidstar import Alphabet, Channel, blackwell_consistency_check, compose, is_garbling

Z = Alphabet("Z", ("0", "1"))


def bsc(eps: str, name: str) -> Channel:
    e = Fraction(eps)
    return Channel(Z, Alphabet(name, ("0", "1")), [[1 - e, e], [e, 1 - e]])


def show(ch: Channel) -> str:
    return "\n".join(
        "    " + "  ".join(f"{str(ch.matrix[o, i]):>6}" for i in range(len(ch.in_alphabet)))
        for o in range(len(ch.out_alphabet))
    )


def main() -> None:
    noisy, clean = bsc("1/4", "A"), bsc("1/10", "B")

    res = is_garbling(noisy, clean)
    print("Is BSC(1/4) a garbling of BSC(1/10)?", res.holds)
    print("  witness L with BSC(1/4) = L o BSC(1/10), columns indexed by the input:")
    print(show(res.witness))
    assert compose(res.witness, clean) == noisy
    print("  (1 - 2/10)(1 - 2d) = 1 - 2/4 gives the crossover d = 3/16 exactly.\n")

    print("Is BSC(1/10) a garbling of BSC(1/4)?", is_garbling(clean, noisy).holds)

    rep = blackwell_consistency_check(noisy, clean, num_problems=2000, rng_seed=0)
    print(f"\n{rep.problems_checked} random decision problems: garbled channel did better in {len(rep.violations)}")

    rep = blackwell_consistency_check(clean, noisy, num_problems=2000, rng_seed=0)
    ua, ub = rep.separating_utilities
    print("Reverse direction: a decision problem separates the channels.")
    print(f"  best expected utility with BSC(1/10): {ua} ({float(ua):.4f})")
    print(f"  best expected utility with BSC(1/4):  {ub} ({float(ub):.4f})")


if __name__ == "__main__":
    main()
