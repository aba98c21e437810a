"""Asynchronous semantics: traces, timings, FIFO edge buffers, timed runs.

Edges act as FIFO buffers of states previously traversed by their source
node.  An adversarial timing decides per step which nodes recompute their
state and which edges deliver.  Timings here are a finite adversarial
prefix followed by an all-active tail, which makes fairness structural and
keeps acceptance decidable through the synchronous lasso on the suffix.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from .automata import DEFAULT_HORIZON_CAP, DistributedAutomaton, HorizonExceeded
from .graphs import Digraph, PointedDigraph

Trace = tuple[str, ...]


def trace_push(t: Trace, q: str) -> Trace:
    """Append q unless it equals the last entry (pushlast)."""
    return t if t and t[-1] == q else t + (q,)


def trace_pop(t: Trace) -> Trace:
    """Drop the first entry unless the trace is a singleton (popfirst)."""
    return t if len(t) <= 1 else t[1:]


def trace_first(t: Trace) -> str:
    return t[0]


def trace_last(t: Trace) -> str:
    return t[-1]


def is_valid_trace(t: Trace) -> bool:
    return len(t) >= 1 and all(a != b for a, b in zip(t, t[1:]))


class TimingError(Exception):
    pass


@dataclass(frozen=True)
class TimingStep:
    nodes: tuple[int, ...]   # activity bit per node id
    edges: tuple[int, ...]   # activity bit per edge, in canonical edge order


@dataclass(frozen=True)
class Timing:
    """Finite adversarial prefix + all-active tail over a fixed digraph.

    The tail guarantees the fairness property (every node and edge active
    infinitely often).  With ``lossless`` set, each prefix step must satisfy
    "edge active implies target node active".
    """

    edge_order: tuple[tuple[int, int, int], ...]
    prefix: tuple[TimingStep, ...]
    lossless: bool = False

    def __post_init__(self):
        for t, step in enumerate(self.prefix, start=1):
            if len(step.edges) != len(self.edge_order):
                raise TimingError(f"step {t}: wrong edge-bit count")
            if self.lossless:
                for bit, (_, _, dst) in zip(step.edges, self.edge_order):
                    if bit and not step.nodes[dst]:
                        raise TimingError(
                            f"step {t}: active edge into inactive node {dst} "
                            f"violates the lossless constraint")

    def node_active(self, t: int, v: int) -> bool:
        if t <= len(self.prefix):
            return bool(self.prefix[t - 1].nodes[v])
        return True

    def edge_active(self, t: int, idx: int) -> bool:
        if t <= len(self.prefix):
            return bool(self.prefix[t - 1].edges[idx])
        return True


def synchronous_timing(d: Digraph) -> Timing:
    return Timing(edge_order=tuple(d.sorted_edges()), prefix=(), lossless=True)


def sample_timing(d: Digraph, prefix_len: int, lossless: bool, seed: int) -> Timing:
    """Uniform random activity bits over the prefix, repaired to the lossless
    constraint when requested (edges into inactive nodes are deactivated).
    Deterministic per seed."""
    if prefix_len < 0:
        raise ValueError("prefix_len must be >= 0")
    rng = random.Random(seed)
    order = tuple(d.sorted_edges())
    steps = []
    for _ in range(prefix_len):
        nodes = tuple(rng.randint(0, 1) for _ in d.nodes())
        edges = tuple(rng.randint(0, 1) for _ in order)
        if lossless:
            edges = tuple(bit if nodes[dst] else 0
                          for bit, (_, _, dst) in zip(edges, order))
        steps.append(TimingStep(nodes, edges))
    return Timing(edge_order=order, prefix=tuple(steps), lossless=lossless)


@dataclass(frozen=True)
class AsyncConfiguration:
    node_state: tuple[str, ...]
    buffers: tuple[Trace, ...]   # aligned with the timing's edge order
    time: int


@dataclass(frozen=True)
class AsyncRunResult:
    edge_order: tuple[tuple[int, int, int], ...]
    configs: tuple[AsyncConfiguration, ...]
    prefix: int
    period: int

    def visited_states(self, v: int) -> set[str]:
        return {c.node_state[v] for c in self.configs}


def async_run(a: DistributedAutomaton, d: Digraph, timing: Timing,
              horizon="auto", cap: int = DEFAULT_HORIZON_CAP) -> AsyncRunResult:
    """Timed run per the three-case inductive definition: an inactive node
    keeps its state, an active one applies delta to the incoming buffer
    heads; each buffer pushes the source's new state and pops when its edge
    is active.  The all-active tail is explored up to lasso closure."""
    if a.rels != 1:
        raise ValueError("asynchronous semantics is defined over 1 relation")
    if d.rels != 1:
        raise ValueError("asynchronous runs need a 1-relational digraph")
    order = timing.edge_order
    if order != tuple(d.sorted_edges()):
        raise TimingError("timing was built for a different digraph")
    in_edges: dict[int, list[int]] = {v: [] for v in d.nodes()}
    for idx, (_, src, dst) in enumerate(order):
        in_edges[dst].append(idx)

    nodes = tuple(a.initial_state(d.label(v)) for v in d.nodes())
    buffers = tuple((a.initial_state(d.label(src)),) for (_, src, _) in order)
    configs = [AsyncConfiguration(nodes, buffers, 0)]
    seen: dict = {}
    limit = cap if horizon == "auto" else min(int(horizon), cap)
    for t in range(1, limit + 1):
        new_nodes = []
        for v in d.nodes():
            if timing.node_active(t, v):
                heads = frozenset(trace_first(buffers[i]) for i in in_edges[v])
                new_nodes.append(a.step(nodes[v], (heads,)))
            else:
                new_nodes.append(nodes[v])
        new_nodes = tuple(new_nodes)
        new_buffers = []
        for idx, (_, src, _) in enumerate(order):
            buf = trace_push(buffers[idx], new_nodes[src])
            if timing.edge_active(t, idx):
                buf = trace_pop(buf)
            new_buffers.append(buf)
        nodes, buffers = new_nodes, tuple(new_buffers)
        configs.append(AsyncConfiguration(nodes, buffers, t))
        if horizon == "auto" and t > len(timing.prefix):
            key = (nodes, buffers)
            if key in seen:
                first = seen[key]
                return AsyncRunResult(order, tuple(configs[:t]),
                                      prefix=first, period=t - first)
            seen[key] = t
    if horizon != "auto":
        return AsyncRunResult(order, tuple(configs),
                              prefix=len(configs) - 1, period=1)
    raise HorizonExceeded(f"no lasso within {limit} steps")


def decide_acceptance_timed(a: DistributedAutomaton, pd: PointedDigraph,
                            timing: Timing) -> bool:
    run = async_run(a, pd.digraph, timing)
    return any(s in a.accepting for s in run.visited_states(pd.point))


def timed_accepted_nodes(a: DistributedAutomaton, d: Digraph,
                         timing: Timing) -> frozenset[int]:
    run = async_run(a, d, timing)
    return frozenset(v for v in d.nodes()
                     if run.visited_states(v) & a.accepting)


@dataclass(frozen=True)
class ConsistencyCounterexample:
    timing_a: Timing
    timing_b: Timing
    node: int


def falsify_consistency(a: DistributedAutomaton, d: Digraph, samples: int,
                        prefix_len: int = 20, lossless: bool = True,
                        seed: int = 0) -> ConsistencyCounterexample | None:
    """Run the synchronous timing plus sampled timings and report the first
    node whose verdict differs between two timings.  Returning None means
    consistent so far; it is not a proof of asynchrony."""
    sync = synchronous_timing(d)
    baseline = timed_accepted_nodes(a, d, sync)
    previous = [(sync, baseline)]
    for k in range(samples):
        timing = sample_timing(d, prefix_len, lossless, seed + k)
        verdict = timed_accepted_nodes(a, d, timing)
        for other_timing, other_verdict in previous:
            diff = verdict ^ other_verdict
            if diff:
                return ConsistencyCounterexample(other_timing, timing, min(diff))
        previous.append((timing, verdict))
    return None


# ---------------------------------------------------------------------------
# Timing JSON:
# {"lossless":bool,"prefix":[{"nodes":[bits],"edges":[bits]}]}
# with edge bits in canonical (rel,src,dst) order.

def timing_to_json_dict(t: Timing) -> dict:
    return {
        "lossless": t.lossless,
        "prefix": [{"nodes": list(s.nodes), "edges": list(s.edges)}
                   for s in t.prefix],
    }


def timing_from_json_dict(obj: dict, d: Digraph) -> Timing:
    order = tuple(d.sorted_edges())
    steps = tuple(TimingStep(tuple(s["nodes"]), tuple(s["edges"]))
                  for s in obj["prefix"])
    return Timing(edge_order=order, prefix=steps,
                  lossless=bool(obj.get("lossless", False)))
