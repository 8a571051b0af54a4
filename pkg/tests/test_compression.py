import itertools

from ctrie.core import (
    CNode,
    INode,
    SNode,
    is_null_inode,
    is_tomb_inode,
    resurrect,
    to_compressed,
    to_weak_tombed,
)

from .helpers import cnode, sn, with_root

# Child states enumerated by the brute-force oracles.
STATES = ("leaf", "null", "tomb", "live")


def make_child(state, chunk):
    k = 100 + chunk
    if state == "leaf":
        return sn(k)
    if state == "null":
        return INode(None)
    if state == "tomb":
        return INode(sn(k, tomb=True))
    return INode(cnode((0, sn(k)), (1, sn(k + 1000))))


def layouts(max_len=3):
    for n in range(1, max_len + 1):
        for chunks in itertools.combinations((0, 7, 19, 31), n):
            for states in itertools.product(STATES, repeat=n):
                yield list(zip(chunks, states))


def describe(node):
    """Structural summary comparable across independently built nodes."""
    if node is None:
        return None
    if isinstance(node, SNode):
        return ("S", node.k, node.tomb)
    if isinstance(node, INode):
        return ("I", id(node))
    bits = [r for r in range(32) if node.bmp >> r & 1]
    return ("C", tuple(zip(bits, (describe(b) for b in node.array))))


def expected_compressed(layout, children):
    if len(layout) == 1 and layout[0][1] == "tomb":
        return ("S", children[0].main.k, True)
    kept = []
    for (chunk, state), b in zip(layout, children):
        if state == "null":
            continue
        if state == "tomb":
            kept.append((chunk, ("S", b.main.k, False)))
        else:
            kept.append((chunk, describe(b)))
    return ("C", tuple(kept)) if kept else None


def expected_weak_tombed(layout, children, cn):
    kept = [(c, s, b) for (c, s), b in zip(layout, children) if s != "null"]
    if len(kept) > 1:
        return cn
    if not kept:
        return None
    chunk, state, b = kept[0]
    if state == "leaf":
        return ("S", b.k, True)
    if state == "tomb":
        return ("S", b.main.k, True)
    if len(kept) == len(layout):
        return cn
    return ("C", ((chunk, describe(b)),))


def test_compression_matches_oracle_on_all_small_layouts():
    count = 0
    for layout in layouts():
        children = [make_child(s, c) for c, s in layout]
        cn = cnode(*zip((c for c, _ in layout), children))
        assert describe(to_compressed(cn)) == expected_compressed(layout, children), layout
        count += 1
    assert count == 4 * 4 + 6 * 16 + 4 * 64


def test_weak_tombing_matches_oracle_on_all_small_layouts():
    for layout in layouts():
        children = [make_child(s, c) for c, s in layout]
        cn = cnode(*zip((c for c, _ in layout), children))
        got = to_weak_tombed(cn)
        want = expected_weak_tombed(layout, children, cn)
        if want is cn:
            assert got is cn, layout
        else:
            assert describe(got) == want, layout


def test_compressed_one_way_over_tomb_is_the_tombed_leaf():
    leaf = sn(1, tomb=True)
    assert to_compressed(cnode((1, INode(leaf)))) is leaf


def test_compressed_all_null_is_absent():
    assert to_compressed(cnode((1, INode(None)), (4, INode(None)))) is None


def test_compressed_mixed_children():
    out = to_compressed(cnode((0, INode(None)), (3, sn(3)), (9, INode(sn(9, tomb=True)))))
    assert out.bmp == (1 << 3) | (1 << 9)
    assert [(b.k, b.tomb) for b in out.array] == [(3, False), (9, False)]


def test_weak_tombed_two_leaves_is_identity():
    cn = cnode((0, sn(0)), (1, sn(1)))
    assert to_weak_tombed(cn) is cn


def test_weak_tombed_leaf_and_null():
    out = to_weak_tombed(cnode((0, sn(0)), (1, INode(None))))
    assert isinstance(out, SNode) and out.tomb and out.k == 0


def test_weak_tombed_all_null_is_absent():
    assert to_weak_tombed(cnode((3, INode(None)))) is None


# -- resurrect --------------------------------------------------------------


def test_resurrect_leaf_is_identity():
    leaf = sn(1)
    assert resurrect(leaf) is leaf


def test_resurrect_tomb_inode():
    out = resurrect(INode(sn(1, "v", tomb=True)))
    assert isinstance(out, SNode) and (out.k, out.v, out.tomb) == (1, "v", False)


def test_resurrect_live_inode_untouched():
    i = INode(cnode((0, sn(0))))
    assert resurrect(i) is i


# -- clean ------------------------------------------------------------------


def test_clean_ignores_non_cnode_main():
    calls = []

    class Spy:
        def before_cas(self, *a):
            calls.append(a)

        def after_cas(self, *a):
            pass

    leaf = sn(1, tomb=True)
    t, _ = with_root(cnode((1, sn(1))), hooks=Spy())
    i = INode(leaf)
    t.clean(i, 5)
    assert i.main is leaf and calls == []


def test_clean_drops_null_child():
    t, root = with_root(cnode((1, INode(None)), (2, sn(2))))
    t.clean(root, 0)
    assert root.main.bmp == 1 << 2


def test_clean_resurrects_tomb_child():
    t, root = with_root(cnode((1, INode(sn(1, tomb=True))), (2, sn(2))))
    t.clean(root, 0)
    assert [(b.k, b.tomb) for b in root.main.array] == [(1, False), (2, False)]


def test_clean_never_entombs_the_root():
    t, root = with_root(cnode((1, INode(sn(1, tomb=True)))))
    t.clean(root, 0)
    assert isinstance(root.main, CNode)
    assert [(b.k, b.tomb) for b in root.main.array] == [(1, False)]


# -- tomb_compress ----------------------------------------------------------


def test_tomb_compress_on_tombed_main():
    t, _ = with_root(cnode((0, sn(0))))
    assert t.tomb_compress(INode(sn(1, tomb=True))) is False


def test_tomb_compress_two_live_children():
    t, _ = with_root(cnode((0, sn(0))))
    cn = cnode((0, sn(0)), (1, sn(1)))
    i = INode(cn)
    assert t.tomb_compress(i) is False
    assert i.main is cn


def test_tomb_compress_single_leaf():
    t, _ = with_root(cnode((0, sn(0))))
    i = INode(cnode((0, sn(5))))
    assert t.tomb_compress(i) is True
    assert isinstance(i.main, SNode) and i.main.tomb and i.main.k == 5
    assert is_tomb_inode(i)


# -- contract_parent --------------------------------------------------------


def test_contract_parent_slot_moved_on():
    i = INode(None)
    parent_main = cnode((1, INode(None)), (2, sn(2)))
    t, parent = with_root(parent_main)
    t.contract_parent(parent, i, 1, 0)
    assert parent.main is parent_main


def test_contract_parent_removes_null_slot():
    i = INode(None)
    t, parent = with_root(cnode((1, i), (2, sn(2))))
    t.contract_parent(parent, i, 1, 0)
    assert parent.main.bmp == 1 << 2


def test_contract_parent_lifts_tombed_leaf():
    i = INode(sn(33, tomb=True))
    t, parent = with_root(cnode((1, i), (2, sn(2))))
    t.contract_parent(parent, i, 33, 0)
    lifted = parent.main.array[0]
    assert isinstance(lifted, SNode) and lifted.k == 33 and not lifted.tomb


def test_contract_parent_null_under_one_way_parent_empties_it():
    i = INode(None)
    t, parent = with_root(cnode((1, i)))
    t.contract_parent(parent, i, 1, 0)
    assert parent.main is None
    assert is_null_inode(parent)
