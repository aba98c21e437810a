"""Emptiness procedures for forgetful automata and bounded witness search.

Forgetfulness makes the set of states reachable anywhere at time t
computable by a set-valued step function; the sequence of those sets is
eventually periodic within 2^|Q| steps, which yields an exact emptiness
decision plus a recursive witness construction (a fresh labeled root fed
by copies of smaller witnesses).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from .automata import (DistributedAutomaton, ForgetfulAutomaton,
                       decide_acceptance_forgetful, decide_acceptance_sync,
                       forgetful_run)
from .graphs import (OracleBoundError, PointedDigraph,
                     enumerate_rooted_ditrees, make)

DITREE_SAFETY_CAP = 6


class WitnessError(Exception):
    pass


@dataclass(frozen=True)
class ReachableStateSets:
    """Sigma_0, Sigma_1, ... (states reachable anywhere at time t) with
    lasso info; eventually periodic within 2^|Q| steps."""

    sets: tuple[frozenset, ...]
    prefix: int
    period: int

    def at(self, t: int) -> frozenset:
        if t < len(self.sets):
            return self.sets[t]
        return self.sets[self.prefix + (t - self.prefix) % self.period]


def _step_sets(a: ForgetfulAutomaton, current: frozenset):
    """delta-hat: all states producible from subsets of the current set,
    plus one generating (letter, neighborhood) pair per new state."""
    out: dict[str, tuple] = {}
    members = sorted(current)
    subsets = [frozenset(c) for k in range(len(members) + 1)
               for c in itertools.combinations(members, k)]
    for letter in a.letters():
        for nvec in itertools.product(subsets, repeat=a.rels):
            q = a.step(letter, nvec)
            key = (letter, tuple(tuple(sorted(s)) for s in nvec))
            if q not in out or key < out[q]:
                out[q] = key
    return frozenset(out), out


def reachable_state_sets(a: ForgetfulAutomaton) -> ReachableStateSets:
    sets = [frozenset({a.initial})]
    seen = {sets[0]: 0}
    for t in range(1, 2 ** len(a.states) + 2):
        nxt, _ = _step_sets(a, sets[-1])
        if nxt in seen:
            return ReachableStateSets(tuple(sets), prefix=seen[nxt],
                                      period=t - seen[nxt])
        seen[nxt] = t
        sets.append(nxt)
    raise AssertionError("state-set sequence failed to become periodic")


@dataclass(frozen=True)
class EmptinessVerdict:
    empty: bool
    time: int | None = None
    state: str | None = None


def forgetful_emptiness(a: ForgetfulAutomaton) -> EmptinessVerdict:
    """Exact emptiness: iterate delta-hat for at most 2^|Q| steps and watch
    for an accepting state (time 0 included: the initial state counts)."""
    if a.initial in a.accepting:
        return EmptinessVerdict(False, 0, a.initial)
    current = frozenset({a.initial})
    for t in range(1, 2 ** len(a.states) + 1):
        current, _ = _step_sets(a, current)
        hit = sorted(current & a.accepting)
        if hit:
            return EmptinessVerdict(False, t, hit[0])
    return EmptinessVerdict(True)


def forgetful_witness(a: ForgetfulAutomaton, t: int, q: str) -> PointedDigraph:
    """A pointed digraph whose point visits q at time t, built recursively:
    one generating (letter, neighborhoods) pair per needed state, a fresh
    root wired to recursively constructed witnesses for time t-1."""
    generators: list[dict] = [{}]
    current = frozenset({a.initial})
    for _ in range(t):
        current, gen = _step_sets(a, current)
        generators.append(gen)
    if t == 0:
        if q != a.initial:
            raise WitnessError(f"{q!r} is not reachable at time 0")
        letter = a.letters()[0]
        return make(len(letter), a.rels, [letter], [], point=0)
    if q not in generators[t]:
        raise WitnessError(f"{q!r} is not reachable at time {t}")

    bits = len(a.letters()[0])

    def build(time: int, state: str):
        """Returns (labels, edges, point) with local ids."""
        if time == 0:
            letter = a.letters()[0]
            return [letter], [], 0
        letter, nvec = generators[time][state]
        labels: list[str] = []
        edges: list[tuple[int, int, int]] = []
        feeders: dict[str, int] = {}
        needed = sorted({s for comp in nvec for s in comp})
        for s in needed:
            sub_labels, sub_edges, sub_point = build(time - 1, s)
            offset = len(labels)
            labels.extend(sub_labels)
            edges.extend((r, u + offset, v + offset) for (r, u, v) in sub_edges)
            feeders[s] = sub_point + offset
        root = len(labels)
        labels.append(letter)
        for k, comp in enumerate(nvec, start=1):
            for s in comp:
                edges.append((k, feeders[s], root))
        return labels, edges, root

    labels, edges, root = build(t, q)
    witness = make(bits, a.rels, labels, edges, point=root)
    run = forgetful_run(a, witness.digraph)
    if run.state_at(t, witness.point) != q:
        raise WitnessError("witness construction failed simulation check")
    return witness


def bounded_ditree_search(a: DistributedAutomaton | ForgetfulAutomaton,
                          max_nodes: int,
                          safety_cap: int = DITREE_SAFETY_CAP):
    """First accepted labeled pointed ditree with at most max_nodes nodes,
    or None.  A None result is NOT an emptiness proof (the general problem
    is undecidable); it only bounds witness size from below."""
    if max_nodes > safety_cap:
        raise OracleBoundError(f"ditree bound {max_nodes} over safety cap "
                               f"{safety_cap}")
    if a.rels != 1:
        raise ValueError("ditree search supports 1-relational automata")
    if isinstance(a, ForgetfulAutomaton):
        bits = len(a.letters()[0])
        decide = decide_acceptance_forgetful
    else:
        bits = len(next(iter(a.init)))
        decide = decide_acceptance_sync
    for tree in enumerate_rooted_ditrees(max_nodes, bits=bits,
                                         safety_bound=safety_cap):
        if decide(a, tree):
            return tree
    return None
