from __future__ import annotations

from ctrie.core import HASH_MASK, CNode, Ctrie, INode, SNode


def ident(k):
    """Integer keys hash to themselves, so tests can place keys by hand."""
    return k & HASH_MASK


def tagged(k):
    """Keys are ``(name, hc)`` pairs; distinct names may share a hashcode."""
    return k[1]


def sn(k, v=None, hc=None, tomb=False):
    return SNode(k, k if v is None else v, ident(k) if hc is None else hc, tomb)


def cnode(*pairs):
    """Build a CNode from ``(chunk, branch)`` pairs in any order."""
    pairs = sorted(pairs, key=lambda p: p[0])
    bmp = 0
    for r, _ in pairs:
        bmp |= 1 << r
    return CNode(bmp, tuple(b for _, b in pairs))


def with_root(main, hash_fn=ident, hooks=None):
    t = Ctrie(hash_fn=hash_fn, hooks=hooks)
    root = INode(main)
    assert t._root.compare_and_set(None, root)
    return t, root

