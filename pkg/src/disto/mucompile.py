"""Translations between the backward mu-fragment and quasi-acyclic automata.

Compilation runs the fixpoint iteration distributedly: states are sets of
verified propositions, so they only ever grow, which makes the automaton
quasi-acyclic and timing-independent.  Decompilation goes through the
automaton's finite trace set and the inductively defined relation that
says which trace a node can traverse given the traces its incoming
neighbors traverse in a lossless-asynchronous environment.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from .automata import DistributedAutomaton, classify
from .formulas import (And, BBox, BDia, Bot, In, MuSystem, Not, Or, Top,
                       flatten_mu)

MAX_COMPILE_PROPS = 10


class ClassError(Exception):
    pass


Traces = frozenset  # of trace tuples


def _state_name(props: frozenset[str]) -> str:
    return "{" + ",".join(sorted(props)) + "}"


def compile_mu_to_aqda(system: MuSystem) -> DistributedAutomaton:
    """Build the equivalent quasi-acyclic asynchronous automaton.

    States are subsets of {P1..Pl, X1..Xm}; a transition adds exactly the
    variables whose body holds for the pair (own propositions, incoming
    proposition sets).  Monotone by construction.
    """
    system = flatten_mu(system)
    props = tuple(f"P{i}" for i in range(1, system.bits + 1)) + system.variables
    if len(props) > MAX_COMPILE_PROPS:
        raise ValueError(
            f"{len(props)} propositions exceed the compile bound of "
            f"{MAX_COMPILE_PROPS} (powerset state space)")
    subsets = [frozenset(c) for k in range(len(props) + 1)
               for c in itertools.combinations(props, k)]
    names = {s: _state_name(s) for s in subsets}
    by_name = {v: k for k, v in names.items()}
    main = system.variables[0]

    def delta(qname: str, nvec) -> str:
        q = by_name[qname]
        neigh = frozenset(by_name[x] for x in nvec[0])
        added = {name for name, body in zip(system.variables, system.bodies)
                 if _pair_holds(body, q, neigh)}
        return names[frozenset(q | added)]

    init = {}
    for labelbits in itertools.product("01", repeat=system.bits):
        label = "".join(labelbits)
        init[label] = names[frozenset(
            f"P{i + 1}" for i, b in enumerate(labelbits) if b == "1")]
    accepting = frozenset(n for s, n in names.items() if main in s)
    return DistributedAutomaton(
        states=tuple(names[s] for s in subsets),
        rels=1, init=init, accepting=accepting, delta=delta)


def _pair_holds(f, own: frozenset[str], neigh: frozenset[frozenset[str]]) -> bool:
    """(q, N) |= body for modal-depth <= 1 bodies: atoms read the own set,
    backward modalities quantify over the incoming proposition sets."""
    if isinstance(f, Top):
        return True
    if isinstance(f, Bot):
        return False
    if isinstance(f, In):
        return f.setsym in own
    if isinstance(f, Not):
        return f.arg.setsym not in own
    if isinstance(f, Or):
        return any(_pair_holds(g, own, neigh) for g in f.args)
    if isinstance(f, And):
        return all(_pair_holds(g, own, neigh) for g in f.args)
    if isinstance(f, BDia):
        return any(_atom_holds(f.args[0], n) for n in neigh)
    if isinstance(f, BBox):
        return all(_atom_holds(f.args[0], n) for n in neigh)
    raise TypeError(f"not a flattened mu body: {f!r}")


def _atom_holds(f, props: frozenset[str]) -> bool:
    if isinstance(f, Top):
        return True
    if isinstance(f, Bot):
        return False
    if isinstance(f, In):
        return f.setsym in props
    if isinstance(f, Not):
        return f.arg.setsym not in props
    if isinstance(f, Or):
        return any(_atom_holds(g, props) for g in f.args)
    if isinstance(f, And):
        return all(_atom_holds(g, props) for g in f.args)
    raise TypeError(f"modal argument not flat: {f!r}")


# ---------------------------------------------------------------------------
# Traces and the enables relation

def _require_quasi_acyclic(a: DistributedAutomaton) -> None:
    if a.rels != 1:
        raise ClassError("trace machinery is defined over 1 relation")
    if not classify(a).is_quasi_acyclic:
        raise ClassError("automaton is not quasi-acyclic; trace set infinite")


def successor_map(a: DistributedAutomaton) -> dict[str, set[str]]:
    """q -> {delta(q,N) : N} without self-loops."""
    succ: dict[str, set[str]] = {q: set() for q in a.states}
    for q in a.states:
        for nvec in a.all_nvecs():
            t = a.step(q, nvec)
            if t != q:
                succ[q].add(t)
    return succ


def compute_traces(a: DistributedAutomaton,
                   starts: Iterable[str] | None = None) -> Traces:
    """All traces: nonempty state sequences with distinct adjacent entries,
    each step witnessed by some neighborhood.  ``starts`` restricts the
    admissible first states (default: every state)."""
    _require_quasi_acyclic(a)
    succ = successor_map(a)
    out: set[tuple[str, ...]] = set()

    def extend(trace: tuple[str, ...]):
        out.add(trace)
        for t in succ[trace[-1]]:
            extend(trace + (t,))

    for q in (a.states if starts is None else starts):
        extend((q,))
    return frozenset(out)


@dataclass(frozen=True)
class EnablesRelation:
    """The least relation over (sets of traces) x traces closed under the
    base rule (singleton histories and one transition) and the step rule
    driven by the one-round history evolution H ~> H'."""

    pairs: frozenset  # of (frozenset of traces, trace)
    traces: Traces

    def enablers_of(self, trace: tuple[str, ...]) -> tuple:
        return tuple(sorted((h for (h, t) in self.pairs if t == trace),
                            key=lambda h: (len(h), sorted(h))))

    def holds(self, history: frozenset, trace: tuple[str, ...]) -> bool:
        return (history, trace) in self.pairs


def _extensions(trace: tuple[str, ...], succ: dict[str, set[str]]):
    out = [trace]
    for q in succ[trace[-1]]:
        out.append(trace + (q,))
    return out


def history_successors(history: frozenset, succ: dict[str, set[str]]):
    """All H' with H ~> H': every trace of H' extends one of H by at most
    one state, and every trace of H has an extension in H'."""
    exts = [[*_extensions(t, succ)] for t in sorted(history)]
    seen = set()
    for choice in itertools.product(*[_nonempty_subsets(e) for e in exts]):
        h2 = frozenset(itertools.chain.from_iterable(choice))
        if h2 not in seen:
            seen.add(h2)
            yield h2


def _nonempty_subsets(items: list):
    for k in range(1, len(items) + 1):
        for combo in itertools.combinations(items, k):
            yield combo


def compute_enables(a: DistributedAutomaton,
                    restrict_to_initial: bool = False) -> EnablesRelation:
    """Least relation containing the base pairs and closed under the
    inductive clause.

    With ``restrict_to_initial`` the trace universe keeps only traces whose
    first state is in the initialization image.  All other trace variables
    are identically empty in the decompiled system (their initialization
    disjunction is empty), so each dropped pair corresponds to an
    identically-false disjunct; decompilation semantics is unchanged while
    the history space shrinks from 2^|T| to 2^|live T|.
    """
    _require_quasi_acyclic(a)
    starts = frozenset(a.init.values()) if restrict_to_initial else None
    traces = compute_traces(a, starts)
    succ = successor_map(a)
    start_states = sorted(starts) if starts is not None else list(a.states)

    # bitmask encoding of traces and histories
    index = {t: i for i, t in enumerate(sorted(traces))}
    by_index = sorted(traces)
    ext_masks = []
    for t in by_index:
        mask = 1 << index[t]
        for q in succ[t[-1]]:
            longer = t + (q,)
            if longer in index:
                mask |= 1 << index[longer]
        ext_masks.append(_bits_of(mask))

    def successors_of(history: int):
        per_trace = [ext_masks[i] for i in _bits_of(history)]
        seen = set()
        for choice in itertools.product(*[_nonempty_unions(e)
                                          for e in per_trace]):
            h2 = 0
            for m in choice:
                h2 |= m
            if h2 not in seen:
                seen.add(h2)
                yield h2

    lasts_memo: dict[int, frozenset] = {}

    def lasts_of(history: int) -> frozenset:
        got = lasts_memo.get(history)
        if got is None:
            got = frozenset(by_index[i][-1] for i in _bits_of(history))
            lasts_memo[history] = got
        return got

    enabled: dict[int, set[int]] = {}
    # base: {singleton traces of N} enables q.push(delta(q, N))
    for nstates in _subsets_of(start_states):
        history = 0
        for q in nstates:
            history |= 1 << index[(q,)]
        bucket = enabled.setdefault(history, set())
        for q in start_states:
            target = a.step(q, (frozenset(nstates),))
            t = (q,) if target == q else (q, target)
            bucket.add(index[t])

    work = list(enabled)
    succ_cache: dict[int, tuple] = {}
    step_memo: dict[tuple[int, int], int] = {}
    while work:
        history = work.pop()
        current = list(enabled[history])
        nexts = succ_cache.get(history)
        if nexts is None:
            nexts = tuple(successors_of(history))
            succ_cache[history] = nexts
        for h2 in nexts:
            bucket = enabled.setdefault(h2, set())
            before = len(bucket)
            for ti in current:
                key = (ti, h2)
                out = step_memo.get(key)
                if out is None:
                    trace = by_index[ti]
                    q2 = a.step(trace[-1], (lasts_of(h2),))
                    out = index[trace if q2 == trace[-1]
                                else trace + (q2,)]
                    step_memo[key] = out
                bucket.add(out)
            if len(bucket) != before:
                work.append(h2)
    pairs = frozenset(
        (frozenset(by_index[i] for i in _bits_of(h)), by_index[ti])
        for h, ts in enabled.items() for ti in ts)
    return EnablesRelation(pairs=pairs, traces=traces)


def _bits_of(mask: int) -> list[int]:
    out = []
    i = 0
    while mask:
        if mask & 1:
            out.append(i)
        mask >>= 1
        i += 1
    return out


def _nonempty_unions(ext: list[int]):
    """All nonempty subset-unions of the given extension bit indices."""
    masks = [1 << i for i in ext]
    for k in range(1, len(masks) + 1):
        for combo in itertools.combinations(masks, k):
            m = 0
            for x in combo:
                m |= x
            yield m


def _subsets_of(items):
    for k in range(len(items) + 1):
        yield from itertools.combinations(items, k)


# ---------------------------------------------------------------------------
# Decompilation

def trace_var(trace: tuple[str, ...]) -> str:
    return "T<" + "|".join(trace) + ">"


def decompile_qda_to_mu(a: DistributedAutomaton) -> MuSystem:
    """Backward mu-fragment formula equivalent to a quasi-acyclic
    (lossless-asynchronous) automaton: one variable per trace plus a main
    variable collecting the accepting-ending traces."""
    enables = compute_enables(a, restrict_to_initial=True)
    traces = sorted(enables.traces, key=lambda t: (len(t), t))
    bits = _infer_bits(a)

    names = ["X1"] + [trace_var(t) for t in traces]
    bodies: list = [_accept_body(a, traces)]
    for trace in traces:
        if len(trace) == 1:
            bodies.append(_init_body(a, trace[0], bits))
        else:
            bodies.append(_transition_body(trace, enables))
    return MuSystem(bits, tuple(names), tuple(bodies))


def _infer_bits(a: DistributedAutomaton) -> int:
    bits = None
    for label in a.init:
        if bits is None:
            bits = len(label)
        elif len(label) != bits:
            raise ValueError("initialization labels of mixed width")
    if bits is None:
        raise ValueError("automaton has no initialization entries")
    return bits


def _accept_body(a: DistributedAutomaton, traces):
    disjuncts = tuple(In(trace_var(t)) for t in traces
                      if t[-1] in a.accepting)
    return _or(disjuncts)


def _init_body(a: DistributedAutomaton, state: str, bits: int):
    disjuncts = []
    for labelbits in itertools.product("01", repeat=bits):
        label = "".join(labelbits)
        if a.init.get(label) != state:
            continue
        lits = tuple(In(f"P{i+1}") if b == "1" else Not(In(f"P{i+1}"))
                     for i, b in enumerate(labelbits))
        disjuncts.append(_and(lits))
    return _or(tuple(disjuncts))


def _transition_body(trace, enables: EnablesRelation):
    options = []
    for history in enables.enablers_of(trace):
        seen_each = tuple(BDia(1, (In(trace_var(s)),)) for s in sorted(history))
        only_those = BBox(1, (_or(tuple(In(trace_var(s))
                                        for s in sorted(history))),))
        options.append(_and(seen_each + (only_those,)))
    return _and((In(trace_var(trace[:1])), _or(tuple(options))))


def _or(args: tuple):
    if not args:
        return Bot()
    if len(args) == 1:
        return args[0]
    return Or(args)


def _and(args: tuple):
    if not args:
        return Top()
    if len(args) == 1:
        return args[0]
    return And(args)

