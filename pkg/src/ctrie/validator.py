"""Structural checks and metrics over a quiescent trie.

Nothing here is safe to run concurrently with mutators: callers must make
sure no insert/remove is in flight. Traversals read every ``INode.main``
exactly once, so results describe one consistent snapshot only when the trie
is quiescent.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Iterator, Optional

from .core import (
    HASH_MASK,
    MAX_LEVEL,
    W,
    CNode,
    CollisionNode,
    Ctrie,
    INode,
    SNode,
)

INVARIANT_IDS = ("INV1", "INV2", "INV3", "INV4", "INV5", "ROOT-NOT-TOMB", "DENSE-ORDER")

_CHUNK = (1 << W) - 1


def chunk(hc: int, lev: int) -> int:
    return (hc >> lev) & _CHUNK


def prefix_of(hc: int, depth: int) -> tuple[int, ...]:
    """First ``depth`` chunks of ``hc``, root level first."""
    return tuple(chunk(hc, W * j) for j in range(depth))


@dataclass(frozen=True)
class Violation:
    invariant: str
    path: tuple[int, ...]
    description: str

    def to_dict(self) -> dict[str, Any]:
        return {"invariant": self.invariant, "path": list(self.path), "description": self.description}


@dataclass
class InvariantReport:
    violations: list[Violation] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def add(self, inv: str, path: tuple[int, ...], msg: str) -> None:
        self.violations.append(Violation(inv, path, msg))

    def by_invariant(self, inv: str) -> list[Violation]:
        return [v for v in self.violations if v.invariant == inv]


def validate(trie: Ctrie) -> InvariantReport:
    """Check INV1-5 plus the root and array-shape invariants on every
    reachable node. Malformed structures are reported, never raised."""
    report = InvariantReport()
    root = trie.root
    if root is None:
        return report
    if not isinstance(root, INode):
        report.add("INV1", (), f"root holds {type(root).__name__}, expected INode")
        return report
    m = root.main
    if isinstance(m, SNode) and m.tomb:
        report.add("ROOT-NOT-TOMB", (), "root inode holds a tombed leaf")
    _check_inode(root, (), report, set())
    return report


def _check_inode(i: INode, path: tuple[int, ...], report: InvariantReport, onpath: set[int]) -> None:
    if id(i) in onpath:
        report.add("INV3", path, "inode reachable from itself")
        return
    onpath.add(id(i))
    try:
        m = i.main
        lev = W * len(path)
        if m is None:
            return
        if isinstance(m, CNode):
            _check_cnode(m, path, report, onpath)
        elif isinstance(m, SNode):
            if not m.tomb:
                report.add("INV1", path, "inode main is an untombed leaf")
            if prefix_of(m.hc, len(path)) != path:
                report.add("INV5", path, f"tombed key {m.k!r} hash prefix mismatch")
        elif isinstance(m, CollisionNode):
            _check_collision(m, path, report)
        else:
            report.add("INV1", path, f"inode main is {type(m).__name__}")
        if lev > MAX_LEVEL + W:
            report.add("INV3", path, f"inode at level {lev} beyond hash width")
    finally:
        onpath.discard(id(i))


def _check_collision(m: CollisionNode, path: tuple[int, ...], report: InvariantReport) -> None:
    ents = m.entries
    if len(ents) < 2:
        report.add("INV1", path, "collision bucket with fewer than 2 entries")
    for j, sn in enumerate(ents):
        if not isinstance(sn, SNode) or sn.tomb:
            report.add("INV1", path, f"collision entry {j} is not a live leaf")
            continue
        if sn.hc != m.hc:
            report.add("INV1", path, f"collision entry {sn.k!r} has a different hashcode")
        if prefix_of(sn.hc, len(path)) != path:
            report.add("INV5", path, f"collision key {sn.k!r} hash prefix mismatch")
        for other in ents[j + 1 :]:
            if isinstance(other, SNode) and (other.k is sn.k or other.k == sn.k):
                report.add("INV1", path, f"duplicate key {sn.k!r} in collision bucket")


def _check_cnode(cn: CNode, path: tuple[int, ...], report: InvariantReport, onpath: set[int]) -> None:
    bmp = cn.bmp
    arr = cn.array
    if not isinstance(bmp, int) or bmp < 0 or bmp > HASH_MASK:
        report.add("DENSE-ORDER", path, f"bitmap {bmp!r} is not a 32-bit mask")
        return
    if not isinstance(arr, tuple) or any(b is None for b in arr):
        report.add("DENSE-ORDER", path, "branch array is not a dense sequence")
        arr = tuple(b for b in arr if b is not None)
    if W * len(path) > MAX_LEVEL:
        report.add("DENSE-ORDER", path, f"branch node at level {W * len(path)} beyond hash width")
    nbits = bmp.bit_count()
    if nbits != len(arr):
        report.add("INV2", path, f"bitmap has {nbits} bits for {len(arr)} branches")
    bits = [r for r in range(1 << W) if (bmp >> r) & 1]
    for j, r in enumerate(bits):
        sub_path = path + (r,)
        if j >= len(arr):
            report.add("INV3", sub_path, f"flag {r} set without a branch")
            continue
        b = arr[j]
        if isinstance(b, INode):
            _check_inode(b, sub_path, report, onpath)
        elif isinstance(b, SNode):
            if b.tomb:
                report.add("INV3", sub_path, f"tombed leaf {b.k!r} inside a branch node")
            if prefix_of(b.hc, len(sub_path)) != sub_path:
                report.add("INV4", sub_path, f"key {b.k!r} hash prefix mismatch")
        else:
            report.add("INV3", sub_path, f"branch is {type(b).__name__}")


@dataclass(frozen=True)
class StateMetrics:
    n: int = 0  # reachable null-inodes
    t: int = 0  # reachable tomb-inodes
    l: int = 0  # live inodes
    r: int = 0  # single tips of any length
    d: int = 0  # total root-to-leaf path length

    @property
    def clean(self) -> bool:
        return self.n == 0 and self.t == 0

    def as_tuple(self) -> tuple[int, int, int, int, int]:
        return (self.n, self.t, self.l, self.r, self.d)


def state_metrics(trie: Ctrie) -> StateMetrics:
    """Compute ``S(n, t, l, r, d)``.

    Path length counts edges from the root inode. The main of an inode is one
    edge below it, so a root null-inode contributes 1 and a leaf in the root
    branch node contributes 2. Leaves are array leaves, ``None`` and tombed
    mains, collision buckets and 0-way branch nodes.
    """
    acc = [0, 0, 0, 0, 0]
    root = trie.root
    if root is not None:
        _metrics_inode(root, 0, acc)
    return StateMetrics(*acc)


def _metrics_inode(i: INode, depth: int, acc: list[int]) -> None:
    m = i.main
    if m is None:
        acc[0] += 1
        acc[4] += depth + 1
    elif isinstance(m, SNode):
        acc[1] += 1
        acc[4] += depth + 1
    elif isinstance(m, CollisionNode):
        acc[2] += 1
        acc[4] += depth + 1
    else:
        acc[2] += 1
        _metrics_cnode(m, depth + 1, acc)


def _metrics_cnode(cn: CNode, depth: int, acc: list[int]) -> None:
    if is_single_tip(cn):
        acc[3] += 1
    if not cn.array:
        acc[4] += depth
    for b in cn.array:
        if isinstance(b, INode):
            _metrics_inode(b, depth + 1, acc)
        else:
            acc[4] += depth + 1


def is_single_tip(cn: CNode) -> bool:
    """0-way node, 1-way node over a tomb-inode, or 1-way node over an inode
    whose branch node is itself a single tip."""
    arr = cn.array
    if not arr:
        return True
    if len(arr) != 1 or not isinstance(arr[0], INode):
        return False
    m = arr[0].main
    if isinstance(m, SNode):
        return m.tomb
    if isinstance(m, CNode):
        return is_single_tip(m)
    return False


@dataclass(frozen=True)
class Tip:
    path: tuple[int, ...]
    length: int


def is_tip(cn: CNode) -> bool:
    singletons = 0
    for b in cn.array:
        if isinstance(b, SNode):
            singletons += 1
        elif isinstance(b, INode):
            m = b.main
            if m is None:
                continue
            if isinstance(m, SNode) and m.tomb:
                singletons += 1
            else:
                return False
    return singletons <= 1


def tips(trie: Ctrie) -> list[Tip]:
    """Every branch node holding at most one leaf or tomb-inode, any number
    of null-inodes and no live inodes.

    ``length`` is 1 plus the number of consecutive 1-way ancestor branch
    nodes, so a tip whose first ancestor is k-way with k > 1 (or which sits
    at the root) has length 1.
    """
    out: list[Tip] = []
    root = trie.root
    if root is not None:
        _collect_tips(root, (), [], out)
    return out


def _collect_tips(i: INode, path: tuple[int, ...], ancestors: list[int], out: list[Tip]) -> None:
    m = i.main
    if not isinstance(m, CNode):
        return
    if is_tip(m):
        run = 0
        for width in reversed(ancestors):
            if width != 1:
                break
            run += 1
        out.append(Tip(path, run + 1))
    ancestors.append(len(m.array))
    bits = [r for r in range(1 << W) if (m.bmp >> r) & 1]
    for r, b in zip(bits, m.array):
        if isinstance(b, INode):
            _collect_tips(b, path + (r,), ancestors, out)
    ancestors.pop()


def tip_count(trie: Ctrie) -> int:
    return len(tips(trie))


def has_key(trie: Ctrie, k: Any) -> bool:
    """Evaluate the recursive ``hasKey`` relation from the root."""
    root = trie.root
    if root is None:
        return False
    return _has_key_inode(root, 0, k, trie.hashcode(k))


def _holds_leaf(sn: Any, k: Any) -> bool:
    return isinstance(sn, SNode) and (sn.k is k or sn.k == k)


def _sub(cn: CNode, lev: int, hc: int) -> Any:
    r = chunk(hc, lev)
    if not cn.bmp & (1 << r):
        return None
    return cn.array[bin(((1 << r) - 1) & cn.bmp).count("1")]


def _has_key_inode(i: INode, lev: int, k: Any, hc: int) -> bool:
    m = i.main
    if _holds_leaf(m, k):
        return True
    if isinstance(m, CollisionNode):
        return any(_holds_leaf(sn, k) for sn in m.entries)
    if isinstance(m, CNode):
        sub = _sub(m, lev, hc)
        if _holds_leaf(sub, k):
            return True
        if isinstance(sub, INode):
            return _has_key_inode(sub, lev + W, k, hc)
    return False


def iter_bindings(trie: Ctrie) -> Iterator[tuple[Any, Any]]:
    """Every (key, value) reachable from the root, tomb-inodes included."""
    root = trie.root
    if root is None:
        return
    stack: list[Any] = [root.main]
    while stack:
        m = stack.pop()
        if isinstance(m, CNode):
            for b in m.array:
                if isinstance(b, INode):
                    stack.append(b.main)
                else:
                    yield b.k, b.v
        elif isinstance(m, SNode):
            yield m.k, m.v
        elif isinstance(m, CollisionNode):
            for sn in m.entries:
                yield sn.k, sn.v


def to_dict(trie: Ctrie) -> dict[Any, Any]:
    return dict(iter_bindings(trie))


def to_set(trie: Ctrie) -> set[tuple[Any, Any]]:
    return set(iter_bindings(trie))


@dataclass(frozen=True)
class PathNode:
    kind: str  # INode | CNode | SNode | CollisionNode
    level: int
    node: Any = field(compare=False, repr=False)


TERMINALS = ("SNode", "CNode", "null-inode", "CollisionNode", "empty")


@dataclass
class PathTrace:
    nodes: list[PathNode]
    terminal: str

    @property
    def kinds(self) -> list[str]:
        return [p.kind for p in self.nodes]


def longest_path(trie: Ctrie, hc: int) -> PathTrace:
    """Follow the chunks of ``hc`` from the root until a leaf, a branch node
    without the chunk's flag, a null-inode or a collision bucket."""
    root = trie.root
    if root is None:
        return PathTrace([], "empty")
    nodes: list[PathNode] = []
    i: Optional[INode] = root
    lev = 0
    while True:
        nodes.append(PathNode("INode", lev, i))
        m = i.main
        if m is None:
            return PathTrace(nodes, "null-inode")
        if isinstance(m, SNode):
            nodes.append(PathNode("SNode", lev, m))
            return PathTrace(nodes, "SNode")
        if isinstance(m, CollisionNode):
            nodes.append(PathNode("CollisionNode", lev, m))
            return PathTrace(nodes, "CollisionNode")
        if not isinstance(m, CNode):
            return PathTrace(nodes, "invalid")
        nodes.append(PathNode("CNode", lev, m))
        sub = _sub(m, lev, hc)
        if sub is None:
            return PathTrace(nodes, "CNode")
        if isinstance(sub, SNode):
            nodes.append(PathNode("SNode", lev + W, sub))
            return PathTrace(nodes, "SNode")
        if not isinstance(sub, INode):
            return PathTrace(nodes, "invalid")
        i = sub
        lev += W


def node_fingerprint(node: Any) -> tuple:
    """Shallow structural identity of an immutable node: its fields, with
    children referenced by identity."""
    if isinstance(node, SNode):
        return ("S", id(node.k), id(node.v), node.hc, node.tomb)
    if isinstance(node, CNode):
        return ("C", node.bmp, tuple(id(b) for b in node.array))
    if isinstance(node, CollisionNode):
        return ("X", node.hc, tuple(id(sn) for sn in node.entries))
    raise TypeError(f"{type(node).__name__} is not an immutable node")


def immutable_nodes(trie: Ctrie) -> list[Any]:
    out: list[Any] = []
    root = trie.root
    if root is None:
        return out
    stack: list[Any] = [root.main]
    while stack:
        m = stack.pop()
        if m is None:
            continue
        out.append(m)
        if isinstance(m, CNode):
            for b in m.array:
                if isinstance(b, INode):
                    stack.append(b.main)
                else:
                    out.append(b)
        elif isinstance(m, CollisionNode):
            out.extend(m.entries)
    return out


def summary(trie: Ctrie) -> dict[str, Any]:
    """One-line JSON payload: metrics, tip count and violations."""
    s = state_metrics(trie)
    report = validate(trie)
    return {
        "n": s.n,
        "t": s.t,
        "l": s.l,
        "r": s.r,
        "d": s.d,
        "tips": tip_count(trie),
        "violations": [v.to_dict() for v in report.violations],
    }
