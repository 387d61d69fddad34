"""Independent brute-force oracles that pin expected test values.

Everything here is reimplemented from scratch on plain integers (pair
index 0..3 in the order (A1,B1), (A1,B2), (A2,B1), (A2,B2); outcomes
+1/-1) and stays deliberately naive.  Nothing imports from the package
under test.
"""

import itertools
import math
from fractions import Fraction

PAIRS = (0, 1, 2, 3)


def score(pair, a, b):
    """1 if the round meets its target: equal outcomes except for pair 3."""
    if pair < 3:
        return 1 if a == b else 0
    return 1 if a != b else 0


def assignment_outcomes(assignment, pair):
    """(a, b) an assignment (a1, a2, b1, b2) produces on a pair index."""
    a1, a2, b1, b2 = assignment
    a = a1 if pair < 2 else a2
    b = b1 if pair % 2 == 0 else b2
    return a, b


def chsh_of_assignment(assignment):
    return sum(score(p, *assignment_outcomes(assignment, p)) for p in PAIRS)


def all_assignments():
    return list(itertools.product((1, -1), repeat=4))


def sabotage_assignment(target):
    """The unique a1=+1 assignment violating exactly the target's term."""
    hits = [
        asg
        for asg in all_assignments()
        if asg[0] == 1
        and all(score(p, *assignment_outcomes(asg, p)) == (0 if p == target else 1) for p in PAIRS)
    ]
    assert len(hits) == 1, hits
    return hits[0]


def guessing_outcomes(pairs):
    """Round outcomes of the most-measured-pair sabotage rule.

    Round 1 answers +1 everywhere; afterwards the target is the pair
    with the highest count so far, earliest pair winning ties.
    """
    counts = [0, 0, 0, 0]
    outcomes = []
    for k, pair in enumerate(pairs):
        if k == 0:
            assignment = (1, 1, 1, 1)
        else:
            target = counts.index(max(counts))
            assignment = sabotage_assignment(target)
        outcomes.append(assignment_outcomes(assignment, pair))
        counts[pair] += 1
    return outcomes


def constant_outcomes(pairs):
    return [(1, 1) for _ in pairs]


def exact_over_sequences(outcome_rule, n):
    """(E(Y), E(X | defined), P(undefined)) over all 4^n uniform sequences."""
    y_sum = Fraction(0)
    x_sum = Fraction(0)
    defined = 0
    total = 0
    for pairs in itertools.product(PAIRS, repeat=n):
        outcomes = outcome_rule(pairs)
        totals = [0, 0, 0, 0]
        scores = [0, 0, 0, 0]
        for pair, (a, b) in zip(pairs, outcomes):
            totals[pair] += 1
            scores[pair] += score(pair, a, b)
        y_sum += Fraction(4 * sum(scores), n)
        if all(totals):
            defined += 1
            x_sum += sum(Fraction(s, t) for s, t in zip(scores, totals))
        total += 1
    e_y = y_sum / total
    e_x = x_sum / defined if defined else None
    return e_y, e_x, Fraction(total - defined, total)


def collective_n2_outcomes(alice_settings, bob_settings):
    """Hand-coded rule of the two-round collective model.

    Settings are 0/1 per wing per round; outcomes +-1 with the special
    cases: Alice (0,1) -> (+1,-1), Bob (1,0) -> (-1,+1).
    """
    a_out = (1, -1) if tuple(alice_settings) == (0, 1) else (1, 1)
    b_out = (-1, 1) if tuple(bob_settings) == (1, 0) else (1, 1)
    return a_out, b_out


def collective_n2_both_score_probability():
    hits = 0
    total = 0
    for a_seq in itertools.product((0, 1), repeat=2):
        for b_seq in itertools.product((0, 1), repeat=2):
            a_out, b_out = collective_n2_outcomes(a_seq, b_seq)
            pair1 = 2 * a_seq[0] + b_seq[0]
            pair2 = 2 * a_seq[1] + b_seq[1]
            if score(pair1, a_out[0], b_out[0]) and score(pair2, a_out[1], b_out[1]):
                hits += 1
            total += 1
    return Fraction(hits, total)


def model101_trigger_probability():
    """Multinomial chance of counts (33, 33, 33, 1) over 100 uniform draws."""
    ways = (
        math.factorial(100)
        // (math.factorial(33) ** 3 * math.factorial(1))
    )
    return Fraction(ways, 4 ** 100)


def model101_branch_x_values():
    """Ratio statistics of the four 101st-round branches after the trigger.

    History: 33 correlated rounds on each of pairs 0..2 and one
    correlated round on pair 3; the rigged round answers a=+1 and
    b=+1/-1 for Bob settings 0/1.
    """
    values = []
    for final_pair in PAIRS:
        totals = [33, 33, 33, 1]
        scores = [33, 33, 33, 0]
        a, b = assignment_outcomes((1, 1, 1, -1), final_pair)
        totals[final_pair] += 1
        scores[final_pair] += score(final_pair, a, b)
        values.append(sum(Fraction(s, t) for s, t in zip(scores, totals)))
    return values


def log10_trigger_probability_via_lgamma():
    log_ways = math.lgamma(101) - 3 * math.lgamma(34) - math.lgamma(2)
    return (log_ways - 100 * math.log(4)) / math.log(10)
