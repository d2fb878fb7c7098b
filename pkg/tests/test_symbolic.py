from fractions import Fraction

import pytest
from flint import arb

from sitnikov.ball import workprec
from sitnikov.errors import DomainError, InconsistencyError, ParseError, ResourceError
from sitnikov.symbolic import (
    RecoveryConfig, SignClass, SymbolSequence, classify, count_lower_bound,
    count_sequences, crossing_brackets, enumerate_sequences, recover_sequence,
    symbols_from_roots,
)

POS, NEG, UND = SignClass.POSITIVE, SignClass.NEGATIVE, SignClass.UNDEFINED


def classes(text):
    return [SignClass(c) for c in text]


def cfg(delta, m=2, P=arb(1), h=arb(1), eps=Fraction(1, 8)):
    return RecoveryConfig(m=m, P=P, delta=Fraction(delta), eps=eps, h=h)


def test_classify():
    assert classify(arb(0.25, 0.1)) is POS
    assert classify(arb(-0.25, 0.1)) is NEG
    assert classify(arb(0.05, 0.1)) is UND
    assert classify(arb(0)) is UND
    with pytest.raises(DomainError):
        classify(arb(1, 0.5), eps=Fraction(1, 4))


def test_recovery_config_invariants():
    with pytest.raises(DomainError):
        cfg(1, m=3)
    with pytest.raises(DomainError):
        cfg(1)              # delta = m P / 2 is not allowed
    with pytest.raises(DomainError):
        cfg("1/2", eps=Fraction(1, 4))


def test_brackets_and_runs():
    br, runs = crossing_brackets(classes("++U--+"))
    assert br == [(0, 0), (2, 4), (5, 6)]
    assert [s for s, _ in runs] == [1, -1, 1]
    assert runs[1][1] == [4, 5]


def test_consecutive_undefined_is_inconsistent():
    with pytest.raises(InconsistencyError) as info:
        crossing_brackets(classes("++UU--"))
    assert tuple(info.value.nodes) == (3, 4)


def test_interval_rule_exact_grid():
    # z > 0 on (0, 2.3), z < 0 on (2.3, 4.9), delta = 1/4, P = 1
    d = Fraction(1, 4)
    signs = [POS if t < Fraction(23, 10) else NEG if t < Fraction(49, 10) else POS
             for t in (i * d for i in range(1, 24))]
    seq = recover_sequence(signs, cfg(d))
    assert seq.s == (2, 2)


def test_interval_rule_ambiguous_needs_parity():
    # gaps known only to lie in (1.5, 2.5)
    signs = classes("+" * 3 + "U" + "-" * 3 + "U" + "+")
    c = cfg("1/2")
    with pytest.raises(ResourceError):
        recover_sequence(signs, c, check_m=False)
    assert recover_sequence(signs, c, parity=True, check_m=False).s == (2, 2)


def test_gap_below_m_raises():
    with pytest.raises(InconsistencyError):
        recover_sequence(classes("++--++"), cfg("1/4"))


def test_run_length_rule():
    # run lengths p give (p + 2) // 2
    seq = recover_sequence(classes("+++---------+"), cfg("1/2"), rule="runlength")
    assert seq.s == (2, 5)


def test_symbols_from_roots():
    with workprec(128):
        roots = [arb(0), arb("2.5", 1e-6), arb("7.25", 1e-6)]
        assert symbols_from_roots(roots, arb(1)) == [2, 4]
        with pytest.raises(ResourceError):
            symbols_from_roots([arb(0), arb(3, 0.01)], arb(1))


def test_sequence_json_round_trip():
    s = SymbolSequence((2, 4, 2), 2, "12.566")
    assert SymbolSequence.from_json(s.to_json()) == s
    with pytest.raises(ParseError):
        SymbolSequence.from_json({"m": 2, "P": "1", "s": [2, -1]})
    with pytest.raises(ParseError):
        SymbolSequence.from_json({"m": 2, "s": [2]})


def _brute(N, m):
    """All even sequences >= m with sum(s + 1) <= N, by filtering a product space."""
    from itertools import product
    out = set()
    symbols = range(m, N, 2)
    for k in range(1, N // (m + 1) + 1):
        for seq in product(symbols, repeat=k):
            if sum(s + 1 for s in seq) <= N:
                out.add(seq)
    return sorted(out)


@pytest.mark.parametrize("m", [2, 4])
@pytest.mark.parametrize("N", [0, 2, 3, 5, 6, 9, 11, 14])
def test_enumeration_matches_brute_force(m, N):
    en = enumerate_sequences(N, m)
    assert en.sequences == _brute(N, m)
    assert en.count == count_sequences(N, m)


def test_small_sets():
    assert enumerate_sequences(6, 2).sequences == [(2,), (2, 2), (4,)]
    assert enumerate_sequences(3, 2).sequences == [(2,)]
    assert enumerate_sequences(2, 2).count == 0
    assert enumerate_sequences(3, 2, include_empty=True).sequences == [(), (2,)]


def test_enumeration_with_period():
    with workprec(128):
        P = arb(4) * arb.pi()
    assert enumerate_sequences(Fraction(76), 2, P).periods == 6
    with pytest.raises(ResourceError):
        enumerate_sequences(60, 2, budget=10)


def test_lower_bound_values():
    assert count_lower_bound(6, 2, 1).contains(4)
    assert count_lower_bound(10, 4, 1).contains(9)
    with pytest.raises(DomainError):
        count_lower_bound(6, 1, 1)
