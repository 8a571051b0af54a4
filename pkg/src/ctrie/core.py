"""Lock-free concurrent hash array mapped trie.

Every mutable location is a single reference updated by compare-and-set:
the trie root and the ``main`` field of each indirection node (``INode``).
Branch nodes (``CNode``), leaves (``SNode``) and full-hash collision buckets
(``CollisionNode``) are immutable; an update builds a replacement node and
swings the owning ``INode.main`` to it.

Removal leaves the trie in a relaxed state (null-inodes, tomb-inodes) that is
contracted by the removing thread and, if it stalls, by any other thread that
runs into the debris.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Callable, Hashable, Optional, Protocol, Union

from .atomic import AtomicRef, stripe_for

W = 5
HASH_BITS = 32
MAX_LEVEL = 30
HASH_MASK = (1 << HASH_BITS) - 1
_CHUNK = (1 << W) - 1


def default_hash(key: Hashable) -> int:
    return hash(key) & HASH_MASK


def flagpos(hc: int, lev: int, bmp: int) -> tuple[int, int]:
    """Return ``(flag, pos)`` for the ``W``-bit chunk of ``hc`` at bit offset ``lev``.

    ``flag`` is the one-hot bitmap mask of the chunk and ``pos`` the index of
    the corresponding entry in the dense branch array of a node with bitmap
    ``bmp``.
    """
    flag = 1 << ((hc >> lev) & _CHUNK)
    return flag, ((flag - 1) & bmp).bit_count()


def set_bits(bmp: int) -> list[int]:
    return [r for r in range(1 << W) if (bmp >> r) & 1]


class SNode:
    """Immutable key/value leaf. ``tomb`` marks the single entombed binding of
    a tomb-inode."""

    __slots__ = ("k", "v", "hc", "tomb")

    def __init__(self, k: Any, v: Any, hc: int, tomb: bool = False) -> None:
        self.k = k
        self.v = v
        self.hc = hc
        self.tomb = tomb

    def tombed(self) -> "SNode":
        return SNode(self.k, self.v, self.hc, True)

    def untombed(self) -> "SNode":
        return SNode(self.k, self.v, self.hc, False)

    def __repr__(self) -> str:
        return f"SNode({self.k!r}, {self.v!r}{', tomb' if self.tomb else ''})"


class CNode:
    __slots__ = ("bmp", "array")

    def __init__(self, bmp: int, array: tuple) -> None:
        self.bmp = bmp
        self.array = array

    def inserted(self, pos: int, flag: int, branch: "Branch") -> "CNode":
        arr = self.array
        return CNode(self.bmp | flag, arr[:pos] + (branch,) + arr[pos:])

    def updated(self, pos: int, branch: "Branch") -> "CNode":
        arr = self.array
        return CNode(self.bmp, arr[:pos] + (branch,) + arr[pos + 1 :])

    def removed(self, pos: int, flag: int) -> "CNode":
        arr = self.array
        return CNode(self.bmp ^ flag, arr[:pos] + arr[pos + 1 :])

    def __repr__(self) -> str:
        return f"CNode({self.bmp:#x}, {list(self.array)!r})"


class CollisionNode:
    """Bucket of two or more live bindings whose keys share one full hashcode."""

    __slots__ = ("hc", "entries")

    def __init__(self, hc: int, entries: tuple) -> None:
        self.hc = hc
        self.entries = entries

    def index_of(self, k: Any) -> int:
        for j, sn in enumerate(self.entries):
            if sn.k is k or sn.k == k:
                return j
        return -1

    def __repr__(self) -> str:
        return f"CollisionNode({self.hc:#x}, {list(self.entries)!r})"


class INode:
    """Indirection node; ``main`` is read directly and written only through
    :meth:`cas_main`."""

    __slots__ = ("main",)

    def __init__(self, main: "MainNode") -> None:
        self.main = main

    def cas_main(self, expected: "MainNode", new: "MainNode") -> bool:
        with stripe_for(self):
            if self.main is expected:
                self.main = new
                return True
            return False

    def __repr__(self) -> str:
        return f"INode({self.main!r})"


Branch = Union[INode, SNode]
MainNode = Union[CNode, SNode, CollisionNode, None]


@dataclass(frozen=True)
class Found:
    value: Any


class _NotFound:
    _instance: Optional["_NotFound"] = None

    def __new__(cls) -> "_NotFound":
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "NOT_FOUND"

    def __bool__(self) -> bool:
        return False

    def __reduce__(self):
        return (_NotFound, ())


NOT_FOUND = _NotFound()
NotFound = _NotFound
LookupResult = Union[Found, _NotFound]

# Internal results of the recursive helpers. Found values travel unwrapped.
NOTFOUND = NOT_FOUND
RESTART = object()


class CasHooks(Protocol):
    """Instrumentation called around every compare-and-set the trie issues.

    ``site`` names the code path (see ``SITES``); ``target`` is the ``INode``
    or, for root updates, the ``Ctrie``. ``before_cas`` runs after the
    expected value was read and before the CAS is attempted.
    """

    def before_cas(self, site: str, target: Any, expected: Any, new: Any) -> None: ...

    def after_cas(self, site: str, target: Any, expected: Any, new: Any, ok: bool) -> None: ...


SITES = (
    "root-insert",
    "root-fix",
    "insert",
    "remove",
    "collision-insert",
    "collision-remove",
    "clean",
    "tomb",
    "contract-null",
    "contract-single",
)


def is_tomb_inode(b: Any) -> bool:
    if type(b) is not INode:
        return False
    m = b.main
    return type(m) is SNode and m.tomb


def is_null_inode(b: Any) -> bool:
    return type(b) is INode and b.main is None


def is_singleton(b: Any) -> bool:
    return type(b) is SNode or is_tomb_inode(b)


def resurrect(b: Branch) -> Branch:
    if type(b) is INode:
        m = b.main
        if type(m) is SNode and m.tomb:
            return m.untombed()
    return b


def to_compressed(cn: CNode) -> MainNode:
    """Compression of ``cn``: null-inodes dropped and tomb-inodes resurrected,
    a 1-way node over a tomb-inode collapsed to its tombed leaf, and ``None``
    when nothing live is left."""
    arr = cn.array
    if len(arr) == 1:
        b = arr[0]
        if type(b) is INode:
            m = b.main
            if type(m) is SNode and m.tomb:
                return m
    narr = []
    nbmp = 0
    for bit, b in zip(set_bits(cn.bmp), arr):
        if type(b) is INode:
            m = b.main
            if m is None:
                continue
            if type(m) is SNode and m.tomb:
                b = m.untombed()
        narr.append(b)
        nbmp |= 1 << bit
    if nbmp:
        return CNode(nbmp, tuple(narr))
    return None


def to_weak_tombed(cn: CNode) -> MainNode:
    """Weak tombing of ``cn``; returns ``cn`` itself when more than one
    non-null branch remains (nothing to entomb)."""
    arr = cn.array
    live = 0
    for b in arr:
        if not (type(b) is INode and b.main is None):
            live += 1
            if live > 1:
                return cn
    farr = []
    nbmp = 0
    for bit, b in zip(set_bits(cn.bmp), arr):
        if not (type(b) is INode and b.main is None):
            farr.append(b)
            nbmp |= 1 << bit
    if len(farr) > 1:
        return cn
    if len(farr) == 1:
        b = farr[0]
        if type(b) is SNode:
            return b.tombed()
        m = b.main
        if type(m) is SNode and m.tomb:
            return m
        if len(farr) == len(arr):
            return cn
        return CNode(nbmp, (b,))
    return None


def _dual(x: Branch, xhc: int, y: SNode, yhc: int, lev: int) -> Union[CNode, CollisionNode]:
    # Main node at ``lev`` holding branches x and y. Equal full hashes only
    # arise for two leaves and become a collision bucket.
    if xhc == yhc:
        return CollisionNode(xhc, (x, y))
    xi = (xhc >> lev) & _CHUNK
    yi = (yhc >> lev) & _CHUNK
    if xi < yi:
        return CNode((1 << xi) | (1 << yi), (x, y))
    if yi < xi:
        return CNode((1 << xi) | (1 << yi), (y, x))
    return CNode(1 << xi, (INode(_dual(x, xhc, y, yhc, lev + W)),))


class Ctrie:
    """Concurrent hash trie map.

    ``insert``, ``lookup`` and ``remove`` may be called from any number of
    threads. ``hash_fn`` must return a 32-bit unsigned hashcode consistent
    with key equality. ``hooks`` is test instrumentation (see ``CasHooks``).
    """

    def __init__(
        self,
        hash_fn: Callable[[Any], int] = default_hash,
        hooks: Optional[CasHooks] = None,
    ) -> None:
        self._hash = hash_fn
        self._hooks = hooks
        self._root: AtomicRef[Optional[INode]] = AtomicRef(None)

    # -- shared cells -----------------------------------------------------

    @property
    def root(self) -> Optional[INode]:
        return self._root.get()

    def hashcode(self, k: Any) -> int:
        return self._hash(k) & HASH_MASK

    def _cas(self, i: INode, expected: MainNode, new: MainNode, site: str) -> bool:
        hooks = self._hooks
        if hooks is None:
            return i.cas_main(expected, new)
        hooks.before_cas(site, i, expected, new)
        ok = i.cas_main(expected, new)
        hooks.after_cas(site, i, expected, new, ok)
        return ok

    def _cas_root(self, expected: Optional[INode], new: Optional[INode], site: str) -> bool:
        hooks = self._hooks
        if hooks is None:
            return self._root.compare_and_set(expected, new)
        hooks.before_cas(site, self, expected, new)
        ok = self._root.compare_and_set(expected, new)
        hooks.after_cas(site, self, expected, new, ok)
        return ok

    # -- public operations ------------------------------------------------

    def insert(self, k: Any, v: Any) -> None:
        hc = self.hashcode(k)
        while True:
            r = self._root.get()
            if r is None or r.main is None:
                nr = INode(CNode(1 << (hc & _CHUNK), (SNode(k, v, hc),)))
                if self._cas_root(r, nr, "root-insert"):
                    return
            elif self.iinsert(r, k, v, 0, None, hc):
                return

    def lookup(self, k: Any) -> LookupResult:
        hc = self.hashcode(k)
        while True:
            r = self._root.get()
            if r is None:
                return NOT_FOUND
            if r.main is None:
                self._cas_root(r, None, "root-fix")
                continue
            res = self.ilookup(r, k, 0, None, hc)
            if res is not RESTART:
                return NOT_FOUND if res is NOTFOUND else Found(res)

    def remove(self, k: Any) -> LookupResult:
        hc = self.hashcode(k)
        while True:
            r = self._root.get()
            if r is None:
                return NOT_FOUND
            if r.main is None:
                self._cas_root(r, None, "root-fix")
                continue
            res = self.iremove(r, k, 0, None, hc)
            if res is not RESTART:
                return NOT_FOUND if res is NOTFOUND else Found(res)

    # dict-style conveniences

    def get(self, k: Any, default: Any = None) -> Any:
        res = self.lookup(k)
        return res.value if res else default

    def __contains__(self, k: Any) -> bool:
        return bool(self.lookup(k))

    def __getitem__(self, k: Any) -> Any:
        res = self.lookup(k)
        if not res:
            raise KeyError(k)
        return res.value

    def __setitem__(self, k: Any, v: Any) -> None:
        self.insert(k, v)

    def __delitem__(self, k: Any) -> None:
        if not self.remove(k):
            raise KeyError(k)

    # -- recursive helpers ------------------------------------------------

    def ilookup(self, i: INode, k: Any, lev: int, parent: Optional[INode], hc: int) -> Any:
        m = i.main
        tm = type(m)
        if tm is CNode:
            bmp = m.bmp
            flag = 1 << ((hc >> lev) & _CHUNK)
            if not bmp & flag:
                return NOTFOUND
            sub = m.array[((flag - 1) & bmp).bit_count()]
            if type(sub) is INode:
                return self.ilookup(sub, k, lev + W, i, hc)
            if not sub.tomb and sub.hc == hc and (sub.k is k or sub.k == k):
                return sub.v
            return NOTFOUND
        if tm is CollisionNode:
            if m.hc != hc:
                return NOTFOUND
            j = m.index_of(k)
            return m.entries[j].v if j >= 0 else NOTFOUND
        if parent is not None:
            self.clean(parent, lev - W)
        return RESTART

    def iinsert(self, i: INode, k: Any, v: Any, lev: int, parent: Optional[INode], hc: int) -> bool:
        m = i.main
        tm = type(m)
        if tm is CNode:
            bmp = m.bmp
            flag = 1 << ((hc >> lev) & _CHUNK)
            pos = ((flag - 1) & bmp).bit_count()
            arr = m.array
            if not bmp & flag:
                ncn = CNode(bmp | flag, arr[:pos] + (SNode(k, v, hc),) + arr[pos:])
                return self._cas(i, m, ncn, "insert")
            sub = arr[pos]
            if type(sub) is INode:
                return self.iinsert(sub, k, v, lev + W, i, hc)
            nsn = SNode(k, v, hc)
            if sub.hc == hc and (sub.k is k or sub.k == k):
                ncn = CNode(bmp, arr[:pos] + (nsn,) + arr[pos + 1 :])
            else:
                nin = INode(_dual(sub, sub.hc, nsn, hc, lev + W))
                ncn = CNode(bmp, arr[:pos] + (nin,) + arr[pos + 1 :])
            return self._cas(i, m, ncn, "insert")
        if tm is CollisionNode:
            nsn = SNode(k, v, hc)
            if m.hc == hc:
                j = m.index_of(k)
                ents = m.entries
                if j >= 0:
                    nm: MainNode = CollisionNode(hc, ents[:j] + (nsn,) + ents[j + 1 :])
                else:
                    nm = CollisionNode(hc, ents + (nsn,))
            else:
                # a key sharing only this prefix splits the bucket off a level down
                nm = _dual(INode(m), m.hc, nsn, hc, lev)
            return self._cas(i, m, nm, "collision-insert")
        if parent is not None:
            self.clean(parent, lev - W)
        return False

    def iremove(self, i: INode, k: Any, lev: int, parent: Optional[INode], hc: int) -> Any:
        m = i.main
        tm = type(m)
        if tm is CNode:
            bmp = m.bmp
            flag = 1 << ((hc >> lev) & _CHUNK)
            if not bmp & flag:
                return NOTFOUND
            arr = m.array
            pos = ((flag - 1) & bmp).bit_count()
            sub = arr[pos]
            if type(sub) is INode:
                res = self.iremove(sub, k, lev + W, i, hc)
                if res is NOTFOUND or res is RESTART:
                    return res
            else:
                if sub.tomb or sub.hc != hc or not (sub.k is k or sub.k == k):
                    return NOTFOUND
                ncn = None if len(arr) == 1 else CNode(bmp ^ flag, arr[:pos] + arr[pos + 1 :])
                if not self._cas(i, m, ncn, "remove"):
                    return RESTART
                res = sub.v
        elif tm is CollisionNode:
            if m.hc != hc:
                return NOTFOUND
            j = m.index_of(k)
            if j < 0:
                return NOTFOUND
            ents = m.entries
            if len(ents) == 2:
                nm: MainNode = ents[1 - j].tombed()
            else:
                nm = CollisionNode(hc, ents[:j] + ents[j + 1 :])
            if not self._cas(i, m, nm, "collision-remove"):
                return RESTART
            res = ents[j].v
        else:
            if parent is not None:
                self.clean(parent, lev - W)
            return RESTART
        if parent is not None:
            self.tomb_compress(i)
            nm = i.main
            if nm is None or (type(nm) is SNode and nm.tomb):
                self.contract_parent(parent, i, hc, lev - W)
        return res

    # -- compression ------------------------------------------------------

    def clean(self, i: INode, lev: int) -> None:
        m = i.main
        if type(m) is CNode:
            ncn = self._compress(m)
            if lev == 0 and type(ncn) is SNode:
                # the root inode must never become a tomb-inode
                ncn = CNode(m.bmp, tuple(resurrect(b) for b in m.array))
            self._cas(i, m, ncn, "clean")

    def tomb_compress(self, i: INode) -> bool:
        while True:
            m = i.main
            if type(m) is not CNode:
                return False
            mwt = self._weak_tomb(m)
            if mwt is m:
                return False
            if self._cas(i, m, mwt, "tomb"):
                return mwt is None or type(mwt) is SNode

    def contract_parent(self, parent: INode, i: INode, hc: int, lev: int) -> None:
        while True:
            m = i.main
            pm = parent.main
            if type(pm) is not CNode:
                return
            bmp = pm.bmp
            flag = 1 << ((hc >> lev) & _CHUNK)
            if not bmp & flag:
                return
            arr = pm.array
            pos = ((flag - 1) & bmp).bit_count()
            if arr[pos] is not i:
                return
            if m is None:
                ncn = None if len(arr) == 1 else CNode(bmp ^ flag, arr[:pos] + arr[pos + 1 :])
                site = "contract-null"
            elif type(m) is SNode and m.tomb:
                ncn = CNode(bmp, arr[:pos] + (self._untomb(m),) + arr[pos + 1 :])
                site = "contract-single"
            else:
                return
            if self._cas(parent, pm, ncn, site):
                return

    # Indirection points for fault-injection builds in the test harness.

    def _compress(self, cn: CNode) -> MainNode:
        return to_compressed(cn)

    def _weak_tomb(self, cn: CNode) -> MainNode:
        return to_weak_tombed(cn)

    def _untomb(self, sn: SNode) -> SNode:
        return sn.untombed()
