"""Chain-recurrence analysis of transition graphs.

The dictionary between graph structure and dynamics: a strongly connected
component (SCC) that is recurrent (more than one box, or a self-loop) is a
piece of the chain-recurrent set; a terminal SCC of the condensation is an
attractor for epsilon-orbits, an initial SCC a repeller; an attractor with
no incoming condensation edge attracts nothing from outside and is a
candidate reversible core.  ``core_scan`` tracks such a candidate through a
refinement schedule and collects the dissipative attractors/repellers that
split off inside the previous stage's absorbing neighbourhoods.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import breadth_first_order, connected_components

from .boxdyn import BoxSet, TransitionGraph, build_graph, initial_cover, point_codes
from .errors import ConfigError

# ---------------------------------------------------------------------------
# decomposition
# ---------------------------------------------------------------------------


@dataclass
class ChainDecomposition:
    """SCC partition of a transition graph plus its condensation DAG.

    SCC ids are canonical: components are numbered by their smallest node
    index, so the labelling is independent of library internals.
    """

    graph: TransitionGraph
    scc_id: np.ndarray
    n_scc: int
    scc_sizes: np.ndarray
    recurrent_scc: np.ndarray
    cond_indptr: np.ndarray
    cond_indices: np.ndarray
    terminal: np.ndarray
    initial: np.ndarray

    def nodes_of(self, s: int) -> np.ndarray:
        return np.nonzero(self.scc_id == s)[0]

    def scc_boxes(self, s) -> BoxSet:
        s = np.atleast_1d(np.asarray(s, dtype=np.int64))
        mask = np.isin(self.scc_id, s)
        return BoxSet(
            self.graph.boxset.domain,
            self.graph.boxset.depth,
            self.graph.boxset.codes[mask],
        )

    def recurrent_nodes(self) -> np.ndarray:
        return self.recurrent_scc[self.scc_id]

    def cond_successors(self, s: int) -> np.ndarray:
        return self.cond_indices[self.cond_indptr[s] : self.cond_indptr[s + 1]]


def decompose(graph: TransitionGraph) -> ChainDecomposition:
    """SCCs, condensation DAG and terminal/initial flags of a graph."""
    n = graph.n_boxes
    mat = graph.to_csr_matrix()
    _, labels = connected_components(mat, directed=True, connection="strong")

    # canonical ids: order components by first node occurrence
    _, first = np.unique(labels, return_index=True)
    rank = np.empty(len(first), dtype=np.int64)
    rank[np.argsort(first, kind="stable")] = np.arange(len(first))
    scc = rank[labels]
    m = len(first)
    sizes = np.bincount(scc, minlength=m)

    edges = graph.edge_array()
    s_u = scc[edges[:, 0]]
    s_v = scc[edges[:, 1]]
    selfloop_scc = np.zeros(m, dtype=bool)
    same = s_u == s_v
    # an intra-SCC edge is a self-loop certificate only for size-1 components;
    # larger components are recurrent regardless
    single = same & (edges[:, 0] == edges[:, 1])
    selfloop_scc[np.unique(s_u[single])] = True
    recurrent = (sizes > 1) | selfloop_scc

    cross = ~same
    if np.any(cross):
        keys = np.unique(s_u[cross] * np.int64(m) + s_v[cross])
        cu = keys // m
        cv = keys % m
    else:
        cu = np.empty(0, dtype=np.int64)
        cv = np.empty(0, dtype=np.int64)
    counts = np.bincount(cu, minlength=m)
    cond_indptr = np.zeros(m + 1, dtype=np.int64)
    np.cumsum(counts, out=cond_indptr[1:])
    cond_indices = cv  # keys are sorted, so rows are sorted too

    outdeg = counts
    indeg = np.bincount(cv, minlength=m)
    return ChainDecomposition(
        graph=graph,
        scc_id=scc,
        n_scc=m,
        scc_sizes=sizes,
        recurrent_scc=recurrent,
        cond_indptr=cond_indptr,
        cond_indices=cond_indices,
        terminal=outdeg == 0,
        initial=indeg == 0,
    )


def chain_recurrent(dec: ChainDecomposition) -> BoxSet:
    """Boxes lying in recurrent SCCs: the combinatorial chain-recurrent set."""
    mask = dec.recurrent_nodes()
    bs = dec.graph.boxset
    return BoxSet(bs.domain, bs.depth, bs.codes[mask])


# ---------------------------------------------------------------------------
# reachability
# ---------------------------------------------------------------------------


def reach_set(graph: TransitionGraph, members, forward: bool = True, min_steps: int = 0) -> BoxSet:
    """Closure of the boxes attainable from ``members`` by epsilon-orbits.

    ``min_steps`` > 0 first advances the set that many strict steps (so the
    result need not contain the sources unless they are revisited).
    """
    from .boxdyn import _member_indices

    idx = _member_indices(graph, members)
    g = graph if forward else graph.reverse()
    current = idx
    for _ in range(min_steps):
        parts = [g.successors(i) for i in current]
        current = (
            np.unique(np.concatenate(parts)) if parts else np.empty(0, np.int64)
        )
    mask = _reach_mask_forward(g, current)
    bs = graph.boxset
    return BoxSet(bs.domain, bs.depth, bs.codes[mask])


def _reach_mask_forward(graph: TransitionGraph, starts: np.ndarray) -> np.ndarray:
    """Nodes reachable from ``starts`` (inclusive) along >= 0 edges.

    A virtual super-source wired to every start lets a single C-level BFS
    cover the whole start set at once.
    """
    n = graph.n_boxes
    starts = np.unique(np.asarray(starts, dtype=np.int64))
    if len(starts) == 0:
        return np.zeros(n, dtype=bool)
    src = np.concatenate(
        [
            np.repeat(np.arange(n, dtype=np.int64), np.diff(graph.indptr)),
            np.full(len(starts), n, dtype=np.int64),
        ]
    )
    dst = np.concatenate([graph.indices, starts])
    mat = csr_matrix((np.ones(len(src), np.int8), (src, dst)), shape=(n + 1, n + 1))
    order = breadth_first_order(mat, n, directed=True, return_predecessors=False)
    mask = np.zeros(n + 1, dtype=bool)
    mask[order] = True
    return mask[:n]


def attainable_from(graph: TransitionGraph, members, min_steps: int = 1) -> BoxSet:
    """Boxes attainable by epsilon-orbits of at least ``min_steps`` steps."""
    if min_steps < 0:
        raise ConfigError("min_steps must be >= 0")
    return reach_set(graph, members, forward=True, min_steps=min_steps)


@dataclass(frozen=True)
class AbsorbingReport:
    passed: bool
    n_violations: int
    examples: tuple


def absorbing_check(graph: TransitionGraph, members) -> AbsorbingReport:
    """Is the member set closed under graph successors (combinatorially
    absorbing)?"""
    from .boxdyn import _member_indices

    idx = _member_indices(graph, members)
    inside = np.zeros(graph.n_boxes, dtype=bool)
    inside[idx] = True
    bad = []
    n_bad = 0
    for i in idx:
        succ = graph.successors(i)
        out = succ[~inside[succ]]
        if len(out):
            n_bad += len(out)
            if len(bad) < 8:
                bad.append((int(graph.boxset.codes[i]), int(graph.boxset.codes[out[0]])))
    return AbsorbingReport(passed=n_bad == 0, n_violations=n_bad, examples=tuple(bad))


# ---------------------------------------------------------------------------
# attractors and repellers
# ---------------------------------------------------------------------------


@dataclass
class RecurrentSCC:
    """A recurrent terminal (attractor) or initial (repeller) component."""

    scc: int
    boxes: BoxSet
    size: int
    dissipative: bool
    witness: BoxSet | None = None


def _topo_order(dec: ChainDecomposition) -> np.ndarray:
    m = dec.n_scc
    indeg = np.zeros(m, dtype=np.int64)
    np.add.at(indeg, dec.cond_indices, 1)
    order = np.empty(m, dtype=np.int64)
    stack = list(np.nonzero(indeg == 0)[0][::-1])
    k = 0
    while stack:
        s = stack.pop()
        order[k] = s
        k += 1
        for t in dec.cond_successors(s):
            indeg[t] -= 1
            if indeg[t] == 0:
                stack.append(t)
    if k != m:
        raise ConfigError("condensation graph is not acyclic")
    return order


def _unique_terminal_dp(dec: ChainDecomposition, flip: bool = False):
    """For each SCC, the unique sink it must end in, or -1 when mixed.

    With ``flip`` the DAG is traversed against the edges, giving the unique
    source each SCC is fed from.
    """
    m = dec.n_scc
    val = np.full(m, -1, dtype=np.int64)
    order = _topo_order(dec)
    if not flip:
        sinks = dec.terminal
        for s in order[::-1]:
            succ = dec.cond_successors(s)
            if sinks[s]:
                val[s] = s
                continue
            vals = np.unique(val[succ])
            val[s] = vals[0] if len(vals) == 1 and vals[0] >= 0 else -1
    else:
        sources = dec.initial
        pred_lists: list[list[int]] = [[] for _ in range(m)]
        for s in range(m):
            for t in dec.cond_successors(s):
                pred_lists[t].append(s)
        for s in order:
            if sources[s]:
                val[s] = s
                continue
            vals = np.unique(val[np.asarray(pred_lists[s], dtype=np.int64)])
            val[s] = vals[0] if len(vals) == 1 and vals[0] >= 0 else -1
    return val


def attractors(dec: ChainDecomposition, with_basins: bool = False) -> list[RecurrentSCC]:
    """Recurrent terminal SCCs; with ``with_basins`` each carries the boxes
    whose every epsilon-future ends in it (a basin-of-uniqueness witness)."""
    ids = np.nonzero(dec.terminal & dec.recurrent_scc)[0]
    val = _unique_terminal_dp(dec, flip=False) if with_basins else None
    out = []
    for s in ids:
        witness = None
        if val is not None:
            witness = dec.scc_boxes(np.nonzero(val == s)[0])
        out.append(
            RecurrentSCC(
                scc=int(s),
                boxes=dec.scc_boxes(int(s)),
                size=int(dec.scc_sizes[s]),
                dissipative=not bool(dec.initial[s]),
                witness=witness,
            )
        )
    return out


def repellers(dec: ChainDecomposition, with_basins: bool = False) -> list[RecurrentSCC]:
    """Recurrent initial SCCs: attractors of the reversed graph."""
    ids = np.nonzero(dec.initial & dec.recurrent_scc)[0]
    val = _unique_terminal_dp(dec, flip=True) if with_basins else None
    out = []
    for s in ids:
        witness = None
        if val is not None:
            witness = dec.scc_boxes(np.nonzero(val == s)[0])
        out.append(
            RecurrentSCC(
                scc=int(s),
                boxes=dec.scc_boxes(int(s)),
                size=int(dec.scc_sizes[s]),
                dissipative=not bool(dec.terminal[s]),
                witness=witness,
            )
        )
    return out


def full_attractor(dec: ChainDecomposition) -> BoxSet:
    """Union of all attractor boxes."""
    ids = np.nonzero(dec.terminal & dec.recurrent_scc)[0]
    return dec.scc_boxes(ids)


def full_repeller(dec: ChainDecomposition) -> BoxSet:
    ids = np.nonzero(dec.initial & dec.recurrent_scc)[0]
    return dec.scc_boxes(ids)


def ruelle_attractor(dec: ChainDecomposition) -> BoxSet:
    """Epsilon-reachable closure (prolongation) of the full attractor."""
    bs = full_attractor(dec)
    if bs.count == 0:
        return bs
    return reach_set(dec.graph, bs, forward=True, min_steps=0)


def ruelle_repeller(dec: ChainDecomposition) -> BoxSet:
    bs = full_repeller(dec)
    if bs.count == 0:
        return bs
    return reach_set(dec.graph, bs, forward=False, min_steps=0)


@dataclass
class ClassifyReport:
    """Trichotomy verdict for one graph, with the sets that witness it."""

    classification: str
    n_scc: int
    n_boxes: int
    epsilon: float
    depth: int
    attractors: list[RecurrentSCC]
    repellers: list[RecurrentSCC]
    full_attractor: BoxSet
    full_repeller: BoxSet
    ruelle_attractor: BoxSet
    ruelle_repeller: BoxSet
    overlap_jaccard: float


def classify(graph: TransitionGraph, dec: ChainDecomposition | None = None) -> ClassifyReport:
    """Conservative / Dissipative / Mixed verdict for a transition graph.

    Conservative: a single recurrent SCC covering every box.  Dissipative:
    the prolongations of the full attractor and full repeller are disjoint.
    Mixed: everything else (they intersect without global chain transitivity).
    """
    dec = dec or decompose(graph)
    att = attractors(dec)
    rep = repellers(dec)
    f_att = full_attractor(dec)
    f_rep = full_repeller(dec)
    r_att = ruelle_attractor(dec)
    r_rep = ruelle_repeller(dec)
    inter = r_att.intersection(r_rep)
    union = r_att.union(r_rep)
    jac = inter.count / union.count if union.count else 0.0
    if dec.n_scc == 1 and bool(dec.recurrent_scc[0]):
        verdict = "Conservative"
    elif inter.count == 0:
        verdict = "Dissipative"
    else:
        verdict = "Mixed"
    return ClassifyReport(
        classification=verdict,
        n_scc=dec.n_scc,
        n_boxes=graph.n_boxes,
        epsilon=graph.epsilon,
        depth=graph.boxset.depth,
        attractors=att,
        repellers=rep,
        full_attractor=f_att,
        full_repeller=f_rep,
        ruelle_attractor=r_att,
        ruelle_repeller=r_rep,
        overlap_jaccard=jac,
    )


# ---------------------------------------------------------------------------
# core scan
# ---------------------------------------------------------------------------


@dataclass
class StageResult:
    """Verdict and extracted sets for one (depth, epsilon) stage."""

    depth: int
    epsilon: float
    pad: float
    n_boxes: int
    n_edges: int
    target_code: int
    target_scc_size: int
    recurrent: bool
    terminal: bool
    initial: bool
    gap: float
    gap_tol: float
    ok: bool
    reason: str
    core_boxes: BoxSet
    fwd_absorbing: BoxSet
    bwd_absorbing: BoxSet
    nested_fwd: bool
    nested_bwd: bool
    new_attractors: list[BoxSet] = field(default_factory=list)
    new_repellers: list[BoxSet] = field(default_factory=list)


@dataclass
class CoreCertificate:
    """Outcome of a refinement scan around a single target point."""

    system: str
    params: dict
    target: tuple
    schedule: list[tuple[int, float]]
    gap_factor: float
    stages: list[StageResult]
    core_persistent: bool
    attractor_witnesses: list[tuple[int, BoxSet]]
    repeller_witnesses: list[tuple[int, BoxSet]]

    @property
    def n_attractor_witnesses(self) -> int:
        return len(self.attractor_witnesses)

    @property
    def n_repeller_witnesses(self) -> int:
        return len(self.repeller_witnesses)


def _min_gap(domain, a: BoxSet, b: BoxSet) -> float:
    """Smallest max-metric distance between box centers of two sets."""
    if a.count == 0 or b.count == 0:
        return math.inf
    if a.intersection(b).count:
        return 0.0
    ca = a.centers()
    cb = b.centers()
    best = math.inf
    chunk = max(1, int(2**22 / max(len(cb), 1)))
    for lo in range(0, len(ca), chunk):
        d = domain.distance(ca[lo : lo + chunk, None, :], cb[None, :, :])
        best = min(best, float(d.min()))
    return best


def _disjoint_at_common_depth(a_depth: int, a: BoxSet, b_depth: int, b: BoxSet) -> bool:
    if a_depth < b_depth:
        a = a.refine_to(b_depth)
    elif b_depth < a_depth:
        b = b.refine_to(a_depth)
    return a.intersection(b).count == 0


def _contained_with_slack(inner: BoxSet, outer_depth: int, outer: BoxSet) -> bool:
    """inner (deeper grid) inside outer refined to inner's depth, plus one
    box ring of slack for quantization."""
    grown = outer.refine_to(inner.depth).dilate(1) if outer_depth < inner.depth else outer.dilate(1)
    return inner.issubset(grown)


def core_scan(
    system,
    target,
    schedule,
    samples_per_axis: int = 4,
    gap_factor: float = 4.0,
    workers: int = 1,
    graph_provider=None,
) -> CoreCertificate:
    """Track a candidate reversible core through a refinement schedule.

    A stage passes when the target's SCC is recurrent and either is both
    terminal and initial (attracts and repels nothing from outside), or the
    attractors reachable from it and the repellers reaching it have not
    separated: their minimal distance stays below
    ``gap_factor * (epsilon + pad + box width)``, the resolution at which
    one-way transport between them is distinguishable from noise.  The core
    is persistent when every stage passes.

    Each stage also extracts forward/backward absorbing box sets around the
    target (its epsilon-reach closures) and records the dissipative
    attractor/repeller SCCs that appear inside the *previous* stage's
    absorbing sets, deduplicated across stages by geometric disjointness.
    """
    target = np.asarray(target, dtype=float).reshape(1, -1)
    if target.shape[1] != system.dim:
        raise ConfigError("target dimension does not match the system")
    schedule = [(int(d), float(e)) for d, e in schedule]
    if not schedule:
        raise ConfigError("schedule must contain at least one stage")

    stages: list[StageResult] = []
    att_wit: list[tuple[int, BoxSet]] = []
    rep_wit: list[tuple[int, BoxSet]] = []
    prev_fwd: BoxSet | None = None
    prev_bwd: BoxSet | None = None

    for depth, eps in schedule:
        if graph_provider is not None:
            g = graph_provider(system, depth, eps, samples_per_axis, workers)
        else:
            cover = initial_cover(system.domain, depth)
            g = build_graph(
                system, cover, eps, samples_per_axis=samples_per_axis, workers=workers
            )
        dec = decompose(g)
        t_code = int(point_codes(system.domain, depth, target)[0])
        t_idx = int(g.boxset.indices_of(np.array([t_code]))[0])
        if t_idx < 0:
            raise ConfigError("target box is outside the covering")
        s = int(dec.scc_id[t_idx])
        recurrent = bool(dec.recurrent_scc[s])
        terminal = bool(dec.terminal[s])
        init = bool(dec.initial[s])
        core_boxes = dec.scc_boxes(s)

        # attractors the target can reach, repellers that can reach it
        cond = csr_matrix(
            (np.ones(len(dec.cond_indices), np.int8), dec.cond_indices, dec.cond_indptr),
            shape=(dec.n_scc, dec.n_scc),
        )
        fwd_scc = breadth_first_order(cond, s, directed=True, return_predecessors=False)
        bwd_scc = breadth_first_order(cond.T.tocsr(), s, directed=True, return_predecessors=False)
        A_ids = [int(t) for t in fwd_scc if dec.terminal[t] and dec.recurrent_scc[t]]
        R_ids = [int(t) for t in bwd_scc if dec.initial[t] and dec.recurrent_scc[t]]
        A_boxes = dec.scc_boxes(np.asarray(A_ids, dtype=np.int64))
        R_boxes = dec.scc_boxes(np.asarray(R_ids, dtype=np.int64))

        h_max = float(np.max(system.domain.box_width(depth)))
        gap_tol = gap_factor * (eps + g.pad + h_max)
        if terminal and init:
            gap = 0.0
        else:
            gap = _min_gap(system.domain, A_boxes, R_boxes)

        if not recurrent:
            ok, reason = False, "target box is not chain-recurrent"
        elif terminal and init:
            ok, reason = True, "terminal and initial"
        elif gap <= gap_tol:
            ok, reason = True, "attractor and repeller sides have not separated"
        else:
            ok = False
            reason = f"attractor/repeller separation {gap:.3g} exceeds {gap_tol:.3g}"

        fwd_abs = reach_set(g, np.array([t_idx]), forward=True, min_steps=0)
        bwd_abs = reach_set(g, np.array([t_idx]), forward=False, min_steps=0)

        nested_fwd = prev_fwd is None or _contained_with_slack(fwd_abs, stages[-1].depth, prev_fwd)
        nested_bwd = prev_bwd is None or _contained_with_slack(bwd_abs, stages[-1].depth, prev_bwd)

        new_att: list[BoxSet] = []
        new_rep: list[BoxSet] = []
        if prev_fwd is not None:
            prev_depth = stages[-1].depth
            for cand in attractors(dec):
                if cand.scc == s or not cand.dissipative:
                    continue
                if not _contained_with_slack(cand.boxes, prev_depth, prev_fwd):
                    continue
                if all(
                    _disjoint_at_common_depth(depth, cand.boxes, d0, w0)
                    for d0, w0 in att_wit
                ):
                    att_wit.append((depth, cand.boxes))
                    new_att.append(cand.boxes)
            for cand in repellers(dec):
                if cand.scc == s or not cand.dissipative:
                    continue
                if not _contained_with_slack(cand.boxes, prev_depth, prev_bwd):
                    continue
                if all(
                    _disjoint_at_common_depth(depth, cand.boxes, d0, w0)
                    for d0, w0 in rep_wit
                ):
                    rep_wit.append((depth, cand.boxes))
                    new_rep.append(cand.boxes)

        stages.append(
            StageResult(
                depth=depth,
                epsilon=eps,
                pad=g.pad,
                n_boxes=g.n_boxes,
                n_edges=g.n_edges,
                target_code=t_code,
                target_scc_size=int(dec.scc_sizes[s]),
                recurrent=recurrent,
                terminal=terminal,
                initial=init,
                gap=gap,
                gap_tol=gap_tol,
                ok=ok,
                reason=reason,
                core_boxes=core_boxes,
                fwd_absorbing=fwd_abs,
                bwd_absorbing=bwd_abs,
                nested_fwd=nested_fwd,
                nested_bwd=nested_bwd,
                new_attractors=new_att,
                new_repellers=new_rep,
            )
        )
        prev_fwd = fwd_abs
        prev_bwd = bwd_abs

    return CoreCertificate(
        system=getattr(system, "name", "?"),
        params=dict(getattr(system, "params", {})),
        target=tuple(float(x) for x in target[0]),
        schedule=schedule,
        gap_factor=gap_factor,
        stages=stages,
        core_persistent=all(st.ok for st in stages),
        attractor_witnesses=att_wit,
        repeller_witnesses=rep_wit,
    )


# ---------------------------------------------------------------------------
# orbit-based verifiers
# ---------------------------------------------------------------------------


@dataclass
class NoisyOrbitReport:
    """Visit statistics of noisy orbits on the depth grid."""

    codes: np.ndarray
    counts: np.ndarray
    n_exits: int
    n_trials: int
    n_steps: int
    burn_in: int
    boxset: BoxSet


def noisy_attractor(
    system,
    x0,
    noise: float,
    n_steps: int,
    n_trials: int,
    depth: int,
    seed: int = 0,
    burn_in: float = 0.1,
) -> NoisyOrbitReport:
    """Visited-box histogram of orbits with uniform bounded noise.

    Each trial draws its own stream seeded (seed, trial), so the histogram
    is reproducible and independent of batching.  Orbits leaving the domain
    on a non-periodic axis are counted as exits and stop contributing.
    """
    if noise < 0:
        raise ConfigError("noise amplitude must be >= 0")
    if not (0 <= burn_in < 1):
        raise ConfigError("burn_in must lie in [0, 1)")
    x0 = np.asarray(x0, dtype=float).reshape(1, -1)
    skip = int(burn_in * n_steps)
    all_codes = []
    n_exits = 0
    for trial in range(n_trials):
        rng = np.random.default_rng((seed, trial))
        kicks = rng.uniform(-noise, noise, size=(n_steps, system.dim))
        x = x0.copy()
        for k in range(n_steps):
            x = system.forward(x) + kicks[k]
            x = system.domain.wrap(x)
            if not bool(system.domain.contains(x, atol=0.0)[0]):
                n_exits += 1
                break
            if k >= skip:
                all_codes.append(point_codes(system.domain, depth, x))
    if all_codes:
        codes, counts = np.unique(np.concatenate(all_codes), return_counts=True)
    else:
        codes = np.empty(0, np.int64)
        counts = np.empty(0, np.int64)
    return NoisyOrbitReport(
        codes=codes,
        counts=counts,
        n_exits=n_exits,
        n_trials=n_trials,
        n_steps=n_steps,
        burn_in=skip,
        boxset=BoxSet(system.domain, depth, codes),
    )


@dataclass
class TrapReport:
    """Empirical absorbing-domain certificate from direct orbit iteration."""

    direction: str
    center: tuple
    seed_radius: float
    bound_radius: float
    max_radius: float
    bounded: bool
    n_orbits: int
    n_steps: int
    boxset: BoxSet

    @property
    def contains_center(self) -> bool:
        c = point_codes(self.boxset.domain, self.boxset.depth,
                        np.asarray(self.center, dtype=float).reshape(1, -1))
        return bool(self.boxset.contains_codes(c)[0])


def trapped_absorbing_domain(
    system,
    center,
    seed_radius: float,
    bound_radius: float,
    n_orbits: int,
    n_steps: int,
    depth: int,
    seed: int = 0,
    direction: str = "forward",
) -> TrapReport:
    """Check that orbits from a Euclidean ball stay inside a larger ball.

    Iterates ``n_orbits`` seeds (plus the center itself) for ``n_steps``
    under the forward map, or the inverse map when direction="backward",
    recording every visited box at the given depth.  When ``bounded`` holds,
    the visited box set is an empirical absorbing domain for the sampled
    orbits: they never leave it again by construction.
    """
    if direction not in ("forward", "backward"):
        raise ConfigError(f"direction must be forward or backward, got {direction!r}")
    if not (0 < seed_radius < bound_radius):
        raise ConfigError("need 0 < seed_radius < bound_radius")
    center = np.asarray(center, dtype=float).reshape(1, -1)
    rng = np.random.default_rng(seed)
    # uniform in the ball: direction times radius with the right density
    vec = rng.normal(size=(n_orbits, system.dim))
    vec /= np.linalg.norm(vec, axis=1, keepdims=True)
    rad = seed_radius * rng.random(n_orbits) ** (1.0 / system.dim)
    pts = np.concatenate([center, center + vec * rad[:, None]], axis=0)

    step = system.forward if direction == "forward" else system.inverse
    if step is None:
        raise ConfigError(f"system {system.name!r} has no inverse")

    visited = [point_codes(system.domain, depth, pts)]
    max_r = float(np.max(np.linalg.norm(pts - center, axis=1)))
    for _ in range(n_steps):
        pts = step(pts)
        r = np.linalg.norm(pts - center, axis=1)
        max_r = max(max_r, float(np.max(r)))
        visited.append(point_codes(system.domain, depth, pts))
    codes = np.unique(np.concatenate(visited))
    return TrapReport(
        direction=direction,
        center=tuple(float(c) for c in center[0]),
        seed_radius=float(seed_radius),
        bound_radius=float(bound_radius),
        max_radius=max_r,
        bounded=max_r < bound_radius,
        n_orbits=n_orbits + 1,
        n_steps=n_steps,
        boxset=BoxSet(system.domain, depth, codes),
    )
