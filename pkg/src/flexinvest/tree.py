"""Staged scenario trees.

Node probabilities are stored as absolute (unconditional) values; a node's
conditional probability is ``tree.probability(n) / tree.probability(parent)``.
Stage 0 is the root (investment) node.
"""
from __future__ import annotations

import io
from dataclasses import dataclass, field
from functools import cached_property
from typing import Optional, Sequence

from .errors import EmptySpec, ProbabilityNotNormalized, StageOutOfRange, ValidationError

STAGE_SUM_TOL = 1e-9
PARENT_SUM_TOL = 1e-12

NodeId = int


@dataclass(frozen=True)
class NodeRecord:
    id: NodeId
    parent: Optional[NodeId]
    stage: int
    probability: float
    data_key: str


@dataclass(frozen=True)
class StageBranching:
    """Branching applied at every node of the previous stage."""

    branches: int
    probabilities: Optional[tuple] = None
    labels: Optional[tuple] = None

    def conditionals(self) -> tuple:
        if self.probabilities is None:
            return tuple(1.0 / self.branches for _ in range(self.branches))
        return tuple(float(p) for p in self.probabilities)

    def branch_labels(self) -> tuple:
        if self.labels is None:
            return tuple(str(j + 1) for j in range(self.branches))
        return tuple(str(lab) for lab in self.labels)


@dataclass(frozen=True)
class BranchSpec:
    stages: tuple

    @classmethod
    def uniform(cls, branches: Sequence[int]) -> "BranchSpec":
        return cls(tuple(StageBranching(int(b)) for b in branches))

    @classmethod
    def from_lists(cls, branches, probabilities=None, labels=None) -> "BranchSpec":
        probabilities = probabilities or [None] * len(branches)
        labels = labels or [None] * len(branches)
        return cls(tuple(
            StageBranching(int(b), None if p is None else tuple(p), None if lab is None else tuple(lab))
            for b, p, lab in zip(branches, probabilities, labels)
        ))


@dataclass(frozen=True)
class Violation:
    code: str
    message: str
    nodes: tuple = ()
    stage: Optional[int] = None


@dataclass
class ValidationReport:
    violations: list = field(default_factory=list)

    def add(self, code, message, nodes=(), stage=None):
        self.violations.append(Violation(code, message, tuple(nodes), stage))

    def extend(self, other: "ValidationReport"):
        self.violations.extend(other.violations)

    def __bool__(self):
        # truthy when something is wrong, so `if report:` reads naturally
        return bool(self.violations)

    def __len__(self):
        return len(self.violations)

    def __iter__(self):
        return iter(self.violations)

    def format(self) -> str:
        return "\n".join(f"[{v.code}] {v.message}" for v in self.violations)


@dataclass(frozen=True)
class ScenarioTree:
    nodes: tuple
    stage_count: int
    steps_per_stage: int
    root: NodeId = 0

    def __post_init__(self):
        if any(n.id != i for i, n in enumerate(self.nodes)):
            raise ValidationError("node ids must be dense and equal to their position")

    def __len__(self):
        return len(self.nodes)

    def node(self, n: NodeId) -> NodeRecord:
        return self.nodes[n]

    def parent(self, n: NodeId) -> Optional[NodeId]:
        return self.nodes[n].parent

    def stage(self, n: NodeId) -> int:
        return self.nodes[n].stage

    def probability(self, n: NodeId) -> float:
        return self.nodes[n].probability

    @cached_property
    def children(self) -> dict:
        out = {n.id: [] for n in self.nodes}
        for n in self.nodes:
            if n.parent is not None and n.parent in out:
                out[n.parent].append(n.id)
        return {k: tuple(v) for k, v in out.items()}

    def stage_nodes(self, s: int) -> tuple:
        return tuple(n.id for n in self.nodes if n.stage == s)

    @property
    def leaves(self) -> tuple:
        return tuple(n.id for n in self.nodes if not self.children[n.id])

    def path(self, n: NodeId) -> tuple:
        """Node ids from the root down to ``n``."""
        out = [n]
        while self.nodes[out[-1]].parent is not None:
            out.append(self.nodes[out[-1]].parent)
        return tuple(reversed(out))

    def to_edge_table(self) -> str:
        buf = io.StringIO()
        buf.write("node\tparent\tstage\tprobability\tdata_key\n")
        for n in self.nodes:
            parent = "" if n.parent is None else str(n.parent)
            buf.write(f"{n.id}\t{parent}\t{n.stage}\t{n.probability!r}\t{n.data_key}\n")
        return buf.getvalue()


def child_key(parent_key: Optional[str], label: str) -> str:
    if parent_key is None or parent_key == "root":
        return label
    return f"{parent_key}/{label}"


def build_tree(spec: BranchSpec, steps_per_stage: int) -> ScenarioTree:
    """Expand a branching spec into a tree, root first, stage by stage."""
    if spec is None or not spec.stages:
        raise EmptySpec("branch spec has no stages")
    if steps_per_stage < 1:
        raise ValidationError("steps_per_stage must be >= 1")
    nodes = [NodeRecord(0, None, 0, 1.0, "root")]
    frontier = [0]
    for s, st in enumerate(spec.stages, start=1):
        if st.branches < 1:
            raise EmptySpec(f"stage {s} has no branches")
        cond = st.conditionals()
        labels = st.branch_labels()
        if len(cond) != st.branches or len(labels) != st.branches:
            raise ValidationError(f"stage {s}: expected {st.branches} probabilities/labels")
        if any(not (0.0 < p <= 1.0) for p in cond):
            raise ProbabilityNotNormalized(f"stage {s}", sum(cond))
        total = sum(cond)
        if abs(total - 1.0) > STAGE_SUM_TOL:
            raise ProbabilityNotNormalized(f"stage {s}", total)
        nxt = []
        for pid in frontier:
            parent = nodes[pid]
            for p, lab in zip(cond, labels):
                nid = len(nodes)
                nodes.append(NodeRecord(nid, pid, s, parent.probability * p,
                                        child_key(parent.data_key, lab)))
                nxt.append(nid)
        frontier = nxt
    return ScenarioTree(tuple(nodes), len(spec.stages) + 1, int(steps_per_stage))


def validate_tree(tree: ScenarioTree) -> ValidationReport:
    report = ValidationReport()
    nodes = tree.nodes
    roots = [n.id for n in nodes if n.parent is None]
    if roots != [tree.root]:
        report.add("root", f"expected exactly one root {tree.root}, found {roots}", roots)
    keys = set()
    for n in nodes:
        if not n.probability > 0.0:
            report.add("probability", f"node {n.id} has non-positive probability {n.probability}", [n.id], n.stage)
        if n.parent is not None:
            if not (0 <= n.parent < len(nodes)):
                report.add("parent", f"node {n.id} references unknown parent {n.parent}", [n.id], n.stage)
                continue
            if nodes[n.parent].stage + 1 != n.stage:
                report.add("stage", f"node {n.id} at stage {n.stage} but parent {n.parent} at stage "
                           f"{nodes[n.parent].stage}", [n.id, n.parent], n.stage)
        elif n.stage != 0:
            report.add("stage", f"root {n.id} must be at stage 0", [n.id], n.stage)
        if n.data_key in keys:
            report.add("data_key", f"duplicate data_key {n.data_key!r}", [n.id], n.stage)
        keys.add(n.data_key)
    for s in range(tree.stage_count):
        members = [n for n in nodes if n.stage == s]
        if not members:
            report.add("stage", f"stage {s} has no nodes", stage=s)
            continue
        total = sum(n.probability for n in members)
        if abs(total - 1.0) > STAGE_SUM_TOL:
            report.add("stage_sum", f"stage {s} probabilities sum to {total!r}",
                       [n.id for n in members], s)
    children = {}
    for n in nodes:
        if n.parent is not None:
            children.setdefault(n.parent, []).append(n)
    for pid, kids in children.items():
        if not (0 <= pid < len(nodes)):
            continue
        total = sum(k.probability for k in kids)
        if abs(total - nodes[pid].probability) > PARENT_SUM_TOL:
            report.add("parent_sum", f"node {pid} has probability {nodes[pid].probability!r} but its "
                       f"children sum to {total!r}", [pid], nodes[pid].stage)
    return report


def ancestor_at_stage(tree: ScenarioTree, node: NodeId, stage: int) -> NodeId:
    if stage < 0 or stage > tree.stage(node):
        raise StageOutOfRange(f"stage {stage} not on the path of node {node} (stage {tree.stage(node)})")
    n = node
    while tree.stage(n) > stage:
        n = tree.parent(n)
    return n
