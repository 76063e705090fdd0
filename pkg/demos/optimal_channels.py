"""Look inside the optimizers: the redundant channel and the minimal coupling.

For the AND gate the redundancy optimum is a channel Q that both sources can
simulate.  The restricted (deterministic-function) variant finds Q = X1 OR X2,
and the union program returns an exact coupling whose pairwise marginals match
the input.

    python demos/optimal_channels.py
"""

from pidstar import generate_fixture, marginalize, redundancy_gh, redundancy_star, union_star


def print_channel(title, ch) -> None:
    print(title)
    ins = ch.in_alphabet.labels
    print("    q \\ " + ch.in_alphabet.name + "  " + "  ".join(f"{l:>6}" for l in ins))
    for o, label in enumerate(ch.out_alphabet.labels):
        if any(ch.matrix[o, i] for i in range(len(ins))):
            print(f"    {label:>8}  " + "  ".join(f"{str(ch.matrix[o, i]):>6}" for i in range(len(ins))))


def main() -> None:
    joint = generate_fixture("and")

    r = redundancy_star(joint)
    print(f"R*(AND) = {r.value:.6f} bits using {r.effective_cardinality} outcomes of Q")
    print_channel("  s(q|y)", r.channel_given_target)
    for k, ch in enumerate(r.channels_given_sources, 1):
        print_channel(f"  s(q|x{k})", ch)

    gh = redundancy_gh(joint)
    print(f"\nrestricted redundancy = {gh.value:.6f} bits")
    print_channel("  s(q|y)", gh.channel_given_target)
    print("  Q is the OR of the sources: it is 1 whenever Y is 1 and with probability 1/3 otherwise.")

    u = union_star(joint)
    s = u.optimal_coupling
    print(f"\nU*(AND) = {u.value:.6f} bits, certified gap {u.fw_gap:.1e}")
    for name in ("X1", "X2"):
        same = marginalize(s, ["Y", name]) == marginalize(joint, ["Y", name])
        print(f"  coupling keeps p(Y,{name}) exactly: {same}")
    print("  support of the coupling:")
    for idx, p in s.support():
        print("    " + " ".join(a.labels[i] for a, i in zip(s.alphabets, idx)) + f"  {p}")


if __name__ == "__main__":
    main()
