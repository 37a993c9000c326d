"""
Agent stream conflict-based search.
Best-first search over a constraint tree whose nodes carry a constraint set, one path per
stream and the sum of costs. Four variants combine an A* or IDA* low level with
non-disjoint or disjoint splitting.
"""

import time
import heapq
import random
from enum import Enum
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple

from ascbs.instance import Instance, Solution
from ascbs.conflicts import Conflict, ConflictKind, conflicts_by_pair, pair_conflicts
from ascbs.constraints import (
    Constraint,
    ConstraintSet,
    CyclicEdgeConstraint,
    CyclicVertexConstraint,
    EdgeConstraint,
    InconsistentConstraintsError,
    PositiveEdgeConstraint,
    PositiveVertexConstraint,
    VertexConstraint,
)
from ascbs.search.low_level import (
    ConflictAvoidanceTable,
    SearchStats,
    SearchTimeout,
    astar,
    build_cat,
    idastar,
)
from ascbs.search.mdd import MDDCache, classify
from ascbs.utils.logging import get_logger


class LowLevel(Enum):
    ASTAR = "astar"
    IDASTAR = "idastar"


class Splitting(Enum):
    NONDISJOINT = "nondisjoint"
    DISJOINT = "disjoint"


class Outcome(Enum):
    SOLVED = "solved"
    UNSOLVABLE = "unsolvable"
    TIMEOUT = "timeout"


VARIANTS: Dict[str, Tuple[LowLevel, Splitting]] = {
    "a-nd": (LowLevel.ASTAR, Splitting.NONDISJOINT),
    "a-d": (LowLevel.ASTAR, Splitting.DISJOINT),
    "ida-nd": (LowLevel.IDASTAR, Splitting.NONDISJOINT),
    "ida-d": (LowLevel.IDASTAR, Splitting.DISJOINT),
}


@dataclass
class SolverConfig:
    """Solver knobs; the four (low_level, splitting) pairs are the solver variants"""
    low_level: LowLevel = LowLevel.ASTAR
    splitting: Splitting = Splitting.NONDISJOINT
    timeout: float = 60.0
    rng_seed: int = 0
    cost_upper_bound: Optional[int] = None

    @classmethod
    def from_variant(cls, variant: str, timeout: float = 60.0, rng_seed: int = 0,
                     cost_upper_bound: Optional[int] = None) -> "SolverConfig":
        """
        Build the configuration of a named variant.

        Args:
            variant: One of 'a-nd', 'a-d', 'ida-nd', 'ida-d'
            timeout: Wall-clock budget in seconds
            rng_seed: Seed for the disjoint-splitting side choice
            cost_upper_bound: Children costing more than this are discarded
        """
        if variant not in VARIANTS:
            raise ValueError(f"Unknown variant '{variant}', expected one of {sorted(VARIANTS)}")
        low_level, splitting = VARIANTS[variant]
        return cls(low_level=low_level, splitting=splitting, timeout=timeout,
                   rng_seed=rng_seed, cost_upper_bound=cost_upper_bound)

    @property
    def variant(self) -> str:
        for key, value in VARIANTS.items():
            if value == (self.low_level, self.splitting):
                return key
        raise AssertionError("every (low_level, splitting) pair is a variant")

    @property
    def name(self) -> str:
        """Display name, e.g. ASCBS-A-ND"""
        return "ASCBS-" + self.variant.upper()

    def to_dict(self) -> Dict[str, Any]:
        return {
            "variant": self.variant,
            "low_level": self.low_level.value,
            "splitting": self.splitting.value,
            "timeout": self.timeout,
            "rng_seed": self.rng_seed,
            "cost_upper_bound": self.cost_upper_bound,
        }


@dataclass
class SolveReport:
    """Result and counters of one solve"""
    outcome: Outcome
    solution: Optional[Solution] = None
    soc: Optional[int] = None
    ct_expanded: int = 0
    ct_generated: int = 0
    low_level_expansions: int = 0
    elapsed: float = 0.0
    seed: int = 0
    variant: str = ""

    @property
    def solved(self) -> bool:
        return self.outcome == Outcome.SOLVED

    def stats(self) -> Dict[str, Any]:
        return {
            "outcome": self.outcome.value,
            "soc": self.soc,
            "ct_expanded": self.ct_expanded,
            "ct_generated": self.ct_generated,
            "low_level_expansions": self.low_level_expansions,
            "elapsed": round(self.elapsed, 6),
        }


@dataclass
class CTNode:
    """A constraint-tree node; `pair_conflicts` maps (i, j), i <= j, to that pair's conflicts"""
    cons: ConstraintSet
    paths: Solution
    cost: int
    pair_conflicts: Dict[Tuple[int, int], List[Conflict]] = field(default_factory=dict)
    depth: int = 0

    @property
    def conflicts(self) -> List[Conflict]:
        return [conf for key in sorted(self.pair_conflicts) for conf in self.pair_conflicts[key]]

    @property
    def n_conflicts(self) -> int:
        return sum(len(found) for found in self.pair_conflicts.values())


@dataclass(frozen=True)
class ChildBundle:
    """Constraints added by one child and the streams it replans"""
    constraints: Tuple[Constraint, ...]
    replan: Tuple[int, ...]


def select_conflict(conflicts: List[Conflict]) -> Optional[Conflict]:
    """Highest-priority conflict; ties go to the smallest (i, j, q_i, q_j, kind) key."""
    if not conflicts:
        return None
    return min(conflicts, key=lambda conf: (-int(conf.priority), conf.sort_key()))


def split_nondisjoint(inst: Instance, node: CTNode, conf: Conflict) -> List[ChildBundle]:
    """
    Two children, each constraining one side of the conflict.

    Conflicts between different streams get cyclic constraints. A stream in conflict with
    itself gets plain vertex/edge constraints at the two steps, since a cyclic constraint
    would block both steps at once.
    """
    i, j = conf.i, conf.j
    if conf.same_stream:
        if conf.kind == ConflictKind.VERTEX:
            first = VertexConstraint(i, conf.v, conf.q_i)
            second = VertexConstraint(i, conf.v, conf.q_j)
        else:
            first = EdgeConstraint(i, conf.v, conf.v_to, conf.q_i)
            second = EdgeConstraint(i, conf.v_to, conf.v, conf.q_j)
        return [ChildBundle((first,), (i,)), ChildBundle((second,), (i,))]

    c_i, c_j = inst.cycle_of(i), inst.cycle_of(j)
    if conf.kind == ConflictKind.VERTEX:
        first = CyclicVertexConstraint(i, conf.v, conf.q_i, c_i)
        second = CyclicVertexConstraint(j, conf.v, conf.q_j, c_j)
    else:
        first = CyclicEdgeConstraint(i, conf.v, conf.v_to, conf.q_i, c_i)
        second = CyclicEdgeConstraint(j, conf.v_to, conf.v, conf.q_j, c_j)
    return [ChildBundle((first,), (i,)), ChildBundle((second,), (j,))]


def split_disjoint(inst: Instance, node: CTNode, conf: Conflict, rng: random.Random) -> List[ChildBundle]:
    """
    Positive and negative children around one side k of the conflict.

    The positive child mandates k's step, blocks k's other congruent steps there and
    broadcasts the matching cyclic constraint to every other stream; it replans every
    stream whose current path breaks one of the new constraints. The negative child only
    forbids k's step.
    """
    assert inst.is_uniform, "disjoint splitting needs a uniform cycle time"
    c = inst.cycle_time
    if conf.same_stream:
        k, other = (conf.i, conf.j) if conf.q_i <= conf.q_j else (conf.j, conf.i)
        take_i = conf.q_i <= conf.q_j
    else:
        take_i = rng.random() < 0.5
        k, other = (conf.i, conf.j) if take_i else (conf.j, conf.i)
    q_k = conf.q_i if take_i else conf.q_j
    t_k = inst.streams[k].t_start
    others = [s.id for s in inst.streams if s.id != k]

    if conf.kind == ConflictKind.VERTEX:
        v = conf.v
        positive: List[Constraint] = [
            PositiveVertexConstraint(k, v, q_k),
            CyclicVertexConstraint(k, v, q_k, c, q_e=q_k),
        ]
        positive += [CyclicVertexConstraint(o, v, t_k + q_k - inst.streams[o].t_start, c) for o in others]
        negative: Constraint = VertexConstraint(k, v, q_k)
    else:
        a, b = (conf.v, conf.v_to) if take_i else (conf.v_to, conf.v)
        positive = [
            PositiveEdgeConstraint(k, a, b, q_k),
            CyclicEdgeConstraint(k, b, a, q_k, c, q_e=q_k),
        ]
        positive += [CyclicEdgeConstraint(o, b, a, t_k + q_k - inst.streams[o].t_start, c) for o in others]
        negative = EdgeConstraint(k, a, b, q_k)

    added = ConstraintSet(positive)
    replan = {other}
    for stream in inst.streams:
        if added.violates(stream.id, node.paths.paths[stream.id]):
            replan.add(stream.id)
    return [
        ChildBundle(tuple(positive), tuple(sorted(replan))),
        ChildBundle((negative,), (k,)),
    ]


class ASCBSSolver:
    """One solve of one instance under one configuration"""

    def __init__(self, inst: Instance, cfg: SolverConfig):
        if cfg.splitting == Splitting.DISJOINT and not inst.is_uniform:
            raise ValueError("Disjoint splitting is only defined for uniform cycle times")
        self.inst = inst
        self.cfg = cfg
        self.logger = get_logger()
        self.rng = random.Random(cfg.rng_seed)
        self.stats = SearchStats()
        self.mdds = MDDCache()
        self.planner = astar if cfg.low_level == LowLevel.ASTAR else idastar
        self.deadline = 0.0
        self.ct_expanded = 0
        self.ct_generated = 0

    def _plan(self, stream: int, cons: ConstraintSet, cat: ConflictAvoidanceTable):
        return self.planner(self.inst, stream, cons, cat, self.deadline, self.stats)

    def _root(self) -> Optional[CTNode]:
        cons = ConstraintSet()
        cat = ConflictAvoidanceTable()
        paths = []
        for stream in self.inst.streams:
            path = self._plan(stream.id, cons, cat)
            if path is None:
                self.logger.info(f"Stream {stream.id} has no path at the root")
                return None
            paths.append(path)
            cat.add_path(path, stream.t_start, stream.cycle)
        sol = Solution(tuple(paths))
        return CTNode(cons, sol, sol.soc, conflicts_by_pair(self.inst, sol), 0)

    def _child(self, node: CTNode, bundle: ChildBundle) -> Optional[CTNode]:
        try:
            cons = node.cons.extend(bundle.constraints)
            cons.check_consistency()
        except InconsistentConstraintsError as e:
            self.logger.warning(f"Discarding child with inconsistent constraints: {e}")
            return None

        paths = node.paths
        for stream in bundle.replan:
            cat = build_cat(self.inst, paths, exclude=stream)
            path = self._plan(stream, cons, cat)
            if path is None:
                return None
            paths = paths.replace_path(stream, path)

        replanned = set(bundle.replan)
        table = {key: found for key, found in node.pair_conflicts.items()
                 if key[0] not in replanned and key[1] not in replanned}
        checked = set()
        for stream in sorted(replanned):
            for other in range(self.inst.n):
                i, j = min(stream, other), max(stream, other)
                if (i, j) in checked:
                    continue
                checked.add((i, j))
                found = pair_conflicts(self.inst, i, paths.paths[i], j, paths.paths[j])
                if found:
                    table[(i, j)] = found
        return CTNode(cons, paths, paths.soc, table, node.depth + 1)

    def _classified(self, node: CTNode) -> List[Conflict]:
        result = []
        for conf in node.conflicts:
            mdd_i = self.mdds.get(self.inst, conf.i, node.cons, len(node.paths.paths[conf.i]))
            mdd_j = mdd_i if conf.same_stream else self.mdds.get(
                self.inst, conf.j, node.cons, len(node.paths.paths[conf.j]))
            result.append(conf.with_priority(classify(conf, mdd_i, mdd_j)))
        return result

    def _split(self, node: CTNode, conf: Conflict) -> List[ChildBundle]:
        if self.cfg.splitting == Splitting.DISJOINT:
            return split_disjoint(self.inst, node, conf, self.rng)
        return split_nondisjoint(self.inst, node, conf)

    def _report(self, outcome: Outcome, started: float, node: Optional[CTNode] = None) -> SolveReport:
        report = SolveReport(
            outcome=outcome,
            solution=node.paths if node is not None else None,
            soc=node.cost if node is not None else None,
            ct_expanded=self.ct_expanded,
            ct_generated=self.ct_generated,
            low_level_expansions=self.stats.expansions,
            elapsed=time.perf_counter() - started,
            seed=self.cfg.rng_seed,
            variant=self.cfg.variant,
        )
        self.logger.end_solve(outcome.value, report.stats())
        return report

    def solve(self) -> SolveReport:
        started = time.perf_counter()
        self.deadline = started + self.cfg.timeout
        run_id = f"{self.cfg.name} n={self.inst.n} c={self.inst.cycle_time or 'nonuniform'}"
        self.logger.start_solve(run_id, self.cfg.to_dict())

        try:
            root = self._root()
            if root is None:
                return self._report(Outcome.UNSOLVABLE, started)
            self.ct_generated = 1
            seq = 0
            open_list = [(root.cost, root.n_conflicts, seq, root)]

            while open_list:
                if time.perf_counter() > self.deadline:
                    return self._report(Outcome.TIMEOUT, started)
                _, _, _, node = heapq.heappop(open_list)

                conf = select_conflict(self._classified(node))
                if conf is None:
                    return self._report(Outcome.SOLVED, started, node)

                self.ct_expanded += 1
                self.logger.log_expansion(node.cost, node.n_conflicts, node.depth, str(conf))

                for bundle in self._split(node, conf):
                    child = self._child(node, bundle)
                    if child is None:
                        continue
                    if self.cfg.cost_upper_bound is not None and child.cost > self.cfg.cost_upper_bound:
                        continue
                    assert child.cost >= node.cost, "child cost below its parent"
                    self.ct_generated += 1
                    seq += 1
                    heapq.heappush(open_list, (child.cost, child.n_conflicts, seq, child))

            return self._report(Outcome.UNSOLVABLE, started)
        except SearchTimeout:
            return self._report(Outcome.TIMEOUT, started)


def solve(inst: Instance, cfg: SolverConfig) -> SolveReport:
    """Solve an instance; see ASCBSSolver."""
    return ASCBSSolver(inst, cfg).solve()
