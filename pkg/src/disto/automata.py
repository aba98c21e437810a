"""Distributed automata and their exact synchronous semantics.

A distributed automaton places the same deterministic machine on every node
of a digraph; in each round a node computes its next state from its own
state and the per-relation sets of incoming-neighbor states.  The machine
at the distinguished node accepts if it ever visits an accepting state.
On a fixed finite digraph the synchronous run is deterministic over a
finite configuration space, hence eventually periodic; acceptance is
decided exactly through lasso detection.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

from .graphs import Digraph, PointedDigraph

DEFAULT_HORIZON_CAP = 10 ** 6
CLASSIFY_LIMIT = 18  # max |Q| * rels for exhaustive delta enumeration


class InitializationError(Exception):
    pass


class HorizonExceeded(Exception):
    pass


class UnmatchedTransition(Exception):
    pass


class ClassificationInfeasible(Exception):
    pass


NVec = tuple[frozenset, ...]

_GUARD_OPS = ("subseteq", "supseteq", "eq", "any")


@dataclass(frozen=True)
class Guard:
    rel: int
    op: str
    states: frozenset

    def __post_init__(self):
        if self.op not in _GUARD_OPS:
            raise ValueError(f"unknown guard op {self.op!r}")

    def holds(self, nvec: NVec) -> bool:
        received = nvec[self.rel - 1]
        if self.op == "subseteq":
            return received <= self.states
        if self.op == "supseteq":
            return received >= self.states
        if self.op == "eq":
            return received == self.states
        return True


@dataclass(frozen=True)
class Rule:
    src: str
    guards: tuple[Guard, ...]
    dst: str

    def matches(self, q: str, nvec: NVec) -> bool:
        return q == self.src and all(g.holds(nvec) for g in self.guards)


class RuleDelta:
    """Ordered guarded rules with first-match-wins resolution."""

    def __init__(self, rules: Sequence[Rule]):
        self.rules = tuple(rules)
        self._by_src: dict[str, tuple[Rule, ...]] = {}
        for r in self.rules:
            self._by_src.setdefault(r.src, ())
            self._by_src[r.src] += (r,)

    def __call__(self, q: str, nvec: NVec) -> str:
        for rule in self._by_src.get(q, ()):
            if rule.matches(q, nvec):
                return rule.dst
        raise UnmatchedTransition(f"no rule matches state {q!r} with {nvec}")

    def target_superset(self, q: str) -> set[str]:
        return {r.dst for r in self._by_src.get(q, ())}


@dataclass
class DistributedAutomaton:
    """(states, init, delta, accepting) over l-bit labeled r-relational digraphs."""

    states: tuple[str, ...]
    rels: int
    init: dict[str, str]          # label bitstring -> state
    accepting: frozenset[str]
    delta: Callable[[str, NVec], str]
    known_monovisioned: bool = field(default=False, compare=False)
    _memo: dict = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self):
        self.accepting = frozenset(self.accepting)
        missing = self.accepting - set(self.states)
        if missing:
            raise ValueError(f"accepting states {missing} not in state set")

    def step(self, q: str, nvec: NVec) -> str:
        key = (q, nvec)
        out = self._memo.get(key)
        if out is None:
            out = self.delta(q, nvec)
            if out not in self._state_set():
                raise UnmatchedTransition(f"delta produced unknown state {out!r}")
            self._memo[key] = out
        return out

    def _state_set(self) -> frozenset:
        ss = getattr(self, "_states_frozen", None)
        if ss is None:
            ss = frozenset(self.states)
            object.__setattr__(self, "_states_frozen", ss)
        return ss

    def initial_state(self, label: str) -> str:
        try:
            return self.init[label]
        except KeyError:
            raise InitializationError(f"no initial state for label {label!r}")

    def all_nvecs(self) -> Iterable[NVec]:
        subsets = [frozenset(c) for k in range(len(self.states) + 1)
                   for c in itertools.combinations(self.states, k)]
        return itertools.product(subsets, repeat=self.rels)

    def enumeration_feasible(self) -> bool:
        return len(self.states) * self.rels <= CLASSIFY_LIMIT


@dataclass(frozen=True)
class SyncConfiguration:
    assignment: tuple[str, ...]
    time: int


@dataclass(frozen=True)
class RunResult:
    configs: tuple[tuple[str, ...], ...]  # one per time step, prefix + one period
    prefix: int
    period: int

    def state_at(self, t: int, v: int) -> str:
        if t < len(self.configs):
            return self.configs[t][v]
        return self.configs[self.prefix + (t - self.prefix) % self.period][v]

    def visited_states(self, v: int) -> set[str]:
        return {conf[v] for conf in self.configs}

    def as_configurations(self) -> list[SyncConfiguration]:
        return [SyncConfiguration(c, t) for t, c in enumerate(self.configs)]


def _neighbor_vec(d: Digraph, conf: Sequence[str], v: int) -> NVec:
    return tuple(frozenset(conf[u] for u in d.in_neighbors(i, v))
                 for i in range(1, d.rels + 1))


def _run_transition_system(d: Digraph, initial: Sequence[str],
                           step_node: Callable[[Sequence[str], int], str],
                           horizon, cap: int) -> RunResult:
    conf = tuple(initial)
    seen = {conf: 0}
    configs = [conf]
    limit = cap if horizon == "auto" else min(int(horizon), cap)
    for t in range(1, limit + 1):
        conf = tuple(step_node(conf, v) for v in d.nodes())
        if horizon == "auto" and conf in seen:
            first = seen[conf]
            return RunResult(tuple(configs), prefix=first, period=t - first)
        if horizon == "auto":
            seen[conf] = t
        configs.append(conf)
        if horizon != "auto" and t == limit:
            # bounded window: no lasso claim, report the last config as fixed
            return RunResult(tuple(configs), prefix=len(configs) - 1, period=1)
    raise HorizonExceeded(f"no lasso within {limit} steps")


def sync_run(a: DistributedAutomaton, d: Digraph,
             horizon="auto", cap: int = DEFAULT_HORIZON_CAP) -> RunResult:
    """The synchronous run rho_0, rho_1, ... with lasso info.

    rho_0(v) = init(label(v)); rho_{t+1}(v) = delta(rho_t(v), incoming sets).
    """
    if a.rels != d.rels:
        raise ValueError(f"automaton has {a.rels} relations, digraph {d.rels}")
    initial = [a.initial_state(d.label(v)) for v in d.nodes()]

    def step_node(conf, v):
        return a.step(conf[v], _neighbor_vec(d, conf, v))

    return _run_transition_system(d, initial, step_node, horizon, cap)


def decide_acceptance_sync(a: DistributedAutomaton, pd: PointedDigraph) -> bool:
    run = sync_run(a, pd.digraph)
    return any(s in a.accepting for s in run.visited_states(pd.point))


def accepted_nodes(a: DistributedAutomaton, d: Digraph) -> frozenset[int]:
    """Bulk variant: the set of nodes whose machine ever visits an
    accepting state, from a single run."""
    run = sync_run(a, d)
    return frozenset(v for v in d.nodes()
                     if run.visited_states(v) & a.accepting)


@dataclass(frozen=True)
class AutomatonClass:
    is_local: bool
    is_quasi_acyclic: bool
    is_monovisioned: bool

    def __post_init__(self):
        if self.is_local and not self.is_quasi_acyclic:
            raise ValueError("local implies quasi-acyclic")


def validate_total(a: DistributedAutomaton) -> tuple | None:
    """First (state, neighborhoods) pair without a matching rule, or None.

    Rule sets with a catch-all rule per state are total by construction;
    otherwise totality is checked by exhaustive enumeration.
    """
    delta = a.delta
    if isinstance(delta, RuleDelta):
        covered = {r.src for r in delta.rules
                   if all(g.op == "any" for g in r.guards)}
        if covered >= set(a.states):
            return None
    if not a.enumeration_feasible():
        raise ClassificationInfeasible(
            "no catch-all rules and the state space is too large for an "
            "exhaustive totality check")
    for q in a.states:
        for nvec in a.all_nvecs():
            try:
                a.step(q, nvec)
            except UnmatchedTransition:
                return (q, nvec)
    return None


def state_diagram(a: DistributedAutomaton) -> dict[str, set[str]]:
    """Successor map q -> {delta(q, nvec) : nvec}, by exhaustive enumeration."""
    if not a.enumeration_feasible():
        raise ClassificationInfeasible(
            f"{len(a.states)} states x {a.rels} relations exceeds the "
            f"exhaustive enumeration limit")
    succ: dict[str, set[str]] = {q: set() for q in a.states}
    for q in a.states:
        for nvec in a.all_nvecs():
            succ[q].add(a.step(q, nvec))
    return succ


def _has_nontrivial_cycle(succ: dict[str, set[str]]) -> bool:
    color: dict[str, int] = {}

    def dfs(q: str) -> bool:
        color[q] = 1
        for t in succ[q]:
            if t == q:
                continue
            c = color.get(t, 0)
            if c == 1 or (c == 0 and dfs(t)):
                return True
        color[q] = 2
        return False

    return any(color.get(q, 0) == 0 and dfs(q) for q in succ)


def classify(a: DistributedAutomaton) -> AutomatonClass:
    succ = state_diagram(a)
    quasi = not _has_nontrivial_cycle(succ)
    local = quasi
    if quasi:
        for q in a.states:
            targets = {a.step(q, nvec) for nvec in a.all_nvecs()}
            if q in targets and targets != {q}:
                local = False
                break
    mono = a.known_monovisioned or _check_monovisioned(a)
    return AutomatonClass(is_local=local, is_quasi_acyclic=quasi,
                          is_monovisioned=mono)


def _check_monovisioned(a: DistributedAutomaton) -> bool:
    if a.rels != 1 or not a.enumeration_feasible():
        return False
    for sink in set(a.states) - set(a.accepting):
        ok = True
        for q in a.states:
            for nvec in a.all_nvecs():
                must = len(nvec[0]) > 1 or sink in nvec[0] or q == sink
                if must and a.step(q, nvec) != sink:
                    ok = False
                    break
            if not ok:
                break
        if ok:
            return True
    return False


def monovisioned_transform(a: DistributedAutomaton,
                           sink: str = "_sink") -> DistributedAutomaton:
    """Add a rejecting sink entered on seeing more than one incoming state
    (or the sink itself).  Preserves acceptance behavior on dipaths."""
    if a.rels != 1:
        raise ValueError("monovisioned transform is defined over 1 relation")
    while sink in a.states:
        sink += "_"
    states = a.states + (sink,)

    def delta(q, nvec):
        received = nvec[0]
        if q == sink or len(received) > 1 or sink in received:
            return sink
        return a.step(q, nvec)

    return DistributedAutomaton(states=states, rels=1, init=dict(a.init),
                                accepting=a.accepting, delta=delta,
                                known_monovisioned=True)


# ---------------------------------------------------------------------------
# Forgetful automata: next state depends on the node's label and the
# incoming-neighbor state sets only, never on the node's own state.

@dataclass
class ForgetfulAutomaton:
    states: tuple[str, ...]
    rels: int
    initial: str
    deltas: dict[str, Callable[[NVec], str]]  # letter (label bitstring) -> fn
    accepting: frozenset[str]
    _memo: dict = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self):
        self.accepting = frozenset(self.accepting)

    def step(self, letter: str, nvec: NVec) -> str:
        key = (letter, nvec)
        out = self._memo.get(key)
        if out is None:
            try:
                fn = self.deltas[letter]
            except KeyError:
                raise InitializationError(f"no transition table for letter {letter!r}")
            out = fn(nvec)
            self._memo[key] = out
        return out

    def letters(self) -> tuple[str, ...]:
        return tuple(sorted(self.deltas))

    def to_distributed(self) -> DistributedAutomaton:
        """Label-in-state embedding with identical acceptance behavior."""
        states = tuple(f"{q}@{a}" for q in self.states for a in self.letters())
        fa = self

        def delta(q, nvec):
            base, letter = q.rsplit("@", 1)
            stripped = tuple(frozenset(s.rsplit("@", 1)[0] for s in ns)
                             for ns in nvec)
            return f"{fa.step(letter, stripped)}@{letter}"

        init = {a: f"{self.initial}@{a}" for a in self.letters()}
        acc = frozenset(f"{q}@{a}" for q in self.accepting for a in self.letters())
        return DistributedAutomaton(states=states, rels=self.rels, init=init,
                                    accepting=acc, delta=delta)


def forgetful_run(a: ForgetfulAutomaton, d: Digraph,
                  horizon="auto", cap: int = DEFAULT_HORIZON_CAP) -> RunResult:
    for v in d.nodes():
        if d.label(v) not in a.deltas:
            raise InitializationError(f"no transition table for letter {d.label(v)!r}")
    initial = [a.initial] * d.n

    def step_node(conf, v):
        return a.step(d.label(v), _neighbor_vec(d, conf, v))

    return _run_transition_system(d, initial, step_node, horizon, cap)


def decide_acceptance_forgetful(a: ForgetfulAutomaton, pd: PointedDigraph) -> bool:
    run = forgetful_run(a, pd.digraph)
    return any(s in a.accepting for s in run.visited_states(pd.point))


# ---------------------------------------------------------------------------
# JSON format:
# {"states":[...],"relations":r,"init":{label:state},"accepting":[...],
#  "rules":[{"from":q,"guards":[{"rel":i,"op":..,"set":[...]}],"to":q'}]}

def to_json_dict(a: DistributedAutomaton) -> dict:
    delta = a.delta
    if not isinstance(delta, RuleDelta):
        raise ValueError("only rule-based automata have a JSON form")
    return {
        "states": list(a.states),
        "relations": a.rels,
        "init": dict(sorted(a.init.items())),
        "accepting": sorted(a.accepting),
        "rules": [
            {"from": r.src,
             "guards": [{"rel": g.rel, "op": g.op, "set": sorted(g.states)}
                        for g in r.guards],
             "to": r.dst}
            for r in delta.rules
        ],
    }


def from_json_dict(obj: dict) -> DistributedAutomaton:
    rules = [
        Rule(r["from"],
             tuple(Guard(g["rel"], g["op"], frozenset(g.get("set", ())))
                   for g in r.get("guards", ())),
             r["to"])
        for r in obj["rules"]
    ]
    return DistributedAutomaton(
        states=tuple(obj["states"]),
        rels=obj["relations"],
        init=dict(obj["init"]),
        accepting=frozenset(obj["accepting"]),
        delta=RuleDelta(rules),
    )


def forgetful_to_json_dict(a: ForgetfulAutomaton) -> dict:
    tables = {}
    for letter in a.letters():
        fn = a.deltas[letter]
        if not isinstance(fn, RuleDelta1):
            raise ValueError("only rule-based forgetful automata have a JSON form")
        tables[letter] = [
            {"guards": [{"rel": g.rel, "op": g.op, "set": sorted(g.states)}
                        for g in r.guards],
             "to": r.dst}
            for r in fn.rules
        ]
    return {
        "states": list(a.states),
        "relations": a.rels,
        "initial": a.initial,
        "accepting": sorted(a.accepting),
        "delta": tables,
    }


class RuleDelta1:
    """Per-letter guarded rules for forgetful automata (no source state)."""

    def __init__(self, rules: Sequence[Rule]):
        self.rules = tuple(rules)

    def __call__(self, nvec: NVec) -> str:
        for rule in self.rules:
            if all(g.holds(nvec) for g in rule.guards):
                return rule.dst
        raise UnmatchedTransition(f"no rule matches neighborhood {nvec}")


def forgetful_from_json_dict(obj: dict) -> ForgetfulAutomaton:
    deltas = {}
    for letter, rows in obj["delta"].items():
        rules = [Rule("", tuple(Guard(g["rel"], g["op"], frozenset(g.get("set", ())))
                                for g in row.get("guards", ())), row["to"])
                 for row in rows]
        deltas[letter] = RuleDelta1(rules)
    return ForgetfulAutomaton(
        states=tuple(obj["states"]),
        rels=obj["relations"],
        initial=obj["initial"],
        deltas=deltas,
        accepting=frozenset(obj["accepting"]),
    )


def total_function_delta(table: dict[tuple[str, NVec], str]) -> Callable:
    def delta(q, nvec):
        return table[(q, nvec)]
    return delta
