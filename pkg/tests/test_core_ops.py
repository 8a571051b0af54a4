from ctrie.core import (
    NOT_FOUND,
    RESTART,
    CNode,
    Ctrie,
    Found,
    INode,
    SNode,
)
from ctrie import validator

from .helpers import cnode, ident, sn, with_root


class Recorder:
    def __init__(self):
        self.calls = []

    def before_cas(self, site, target, expected, new):
        pass

    def after_cas(self, site, target, expected, new, ok):
        self.calls.append((site, ok))


def test_insert_then_lookup():
    t = Ctrie()
    t.insert("k1", "v1")
    assert t.lookup("k1") == Found("v1")


def test_lookup_on_empty():
    assert Ctrie().lookup("k") is NOT_FOUND


def test_remove_on_empty():
    assert Ctrie().remove("k") is NOT_FOUND


def test_insert_remove_lookup():
    t = Ctrie()
    t.insert("k", 1)
    assert t.remove("k") == Found(1)
    assert t.lookup("k") is NOT_FOUND


def test_replacement():
    t = Ctrie()
    t.insert("k", 1)
    t.insert("k", 2)
    assert t.lookup("k") == Found(2)
    assert validator.to_dict(t) == {"k": 2}


def test_shared_first_chunk_extends_a_level():
    t = Ctrie(hash_fn=ident)
    t.insert(1, "a")
    t.insert(33, "b")
    top = t.root.main
    assert isinstance(top, CNode)
    assert top.bmp == 1 << 1
    (child,) = top.array
    assert isinstance(child, INode)
    low = child.main
    assert isinstance(low, CNode)
    assert low.bmp == (1 << 0) | (1 << 1)
    assert [(s.k, s.v) for s in low.array] == [(1, "a"), (33, "b")]


def test_absent_second_level_chunk():
    t = Ctrie(hash_fn=ident)
    t.insert(1, "a")
    t.insert(33, "b")
    # 65 shares chunk 1 at the root, then wants chunk 2 which is unset
    assert t.lookup(65) is NOT_FOUND


def test_remove_two_of_three_sharing_a_prefix():
    t = Ctrie(hash_fn=ident)
    for k in (1, 33, 65):
        t.insert(k, k)
    assert t.remove(1) == Found(1)
    assert t.remove(65) == Found(65)
    assert t.lookup(33) == Found(33)
    assert validator.tip_count(t) <= 1
    assert validator.validate(t).ok


def test_dict_conveniences():
    t = Ctrie()
    t["a"] = 1
    assert "a" in t and t["a"] == 1 and t.get("b", 0) == 0
    del t["a"]
    assert "a" not in t


# -- iinsert ----------------------------------------------------------------


def test_iinsert_free_slot():
    t, root = with_root(cnode((2, sn(2))))
    assert t.iinsert(root, 3, "x", 0, None, 3)
    assert root.main.bmp == (1 << 2) | (1 << 3)
    assert root.main.array[1].v == "x"


def test_iinsert_equal_key_replaces_value():
    t, root = with_root(cnode((2, sn(2, "old"))))
    assert t.iinsert(root, 2, "new", 0, None, 2)
    assert root.main.bmp == 1 << 2
    assert root.main.array[0].v == "new"


def test_iinsert_on_tomb_inode_cleans_parent():
    tomb = INode(sn(1, tomb=True))
    t, root = with_root(cnode((1, tomb), (2, sn(2))))
    assert t.iinsert(tomb, 33, 33, 5, root, 33) is False
    resurrected = root.main.array[0]
    assert isinstance(resurrected, SNode) and resurrected.k == 1 and not resurrected.tomb


# -- ilookup ----------------------------------------------------------------


def test_ilookup_flag_unset():
    t, root = with_root(cnode((2, sn(2))))
    assert t.ilookup(root, 5, 0, None, 5) is NOT_FOUND


def test_ilookup_hits_leaf():
    t, root = with_root(cnode((2, sn(2, "v"))))
    assert t.ilookup(root, 2, 0, None, 2) == "v"


def test_ilookup_null_inode_restarts_after_clean():
    null = INode(None)
    t, root = with_root(cnode((1, null), (2, sn(2))))
    assert t.ilookup(null, 33, 5, root, 33) is RESTART
    assert root.main.bmp == 1 << 2


# -- iremove ----------------------------------------------------------------


def test_iremove_flag_unset_issues_no_cas():
    rec = Recorder()
    t, root = with_root(cnode((2, sn(2))), hooks=rec)
    assert t.iremove(root, 5, 0, None, 5) is NOT_FOUND
    assert rec.calls == []


def test_iremove_last_binding_contracts_upward():
    rec = Recorder()
    inner = INode(cnode((0, sn(1))))
    t, root = with_root(cnode((1, inner), (2, sn(2))), hooks=rec)
    assert t.remove(1) == Found(1)
    sites = [s for s, ok in rec.calls if ok]
    assert sites[0] == "remove"
    assert "contract-null" in sites
    assert root.main.bmp == 1 << 2
    assert [b.k for b in root.main.array] == [2]


def test_iremove_leaves_survivor_resurrected_in_parent():
    # remove one of two leaves below a shared prefix: the survivor moves back up
    t = Ctrie(hash_fn=ident)
    for k in (1, 33, 2):
        t.insert(k, k)
    t.remove(33)
    top = t.root.main
    assert [type(b) for b in top.array] == [SNode, SNode]
    assert [b.k for b in top.array] == [1, 2]
    assert validator.state_metrics(t).clean


def test_iremove_failed_cas_restarts():
    class Interfere:
        fired = False

        def before_cas(self, site, target, expected, new):
            if site == "remove" and not self.fired:
                self.fired = True
                target.cas_main(expected, cnode((2, sn(2)), (3, sn(3))))

        def after_cas(self, *a):
            pass

    t, root = with_root(cnode((2, sn(2))), hooks=Interfere())
    assert t.iremove(root, 2, 0, None, 2) is RESTART
    assert t.lookup(2) == Found(2)


def test_root_null_inode_is_replaced_by_insert():
    t, root = with_root(None)
    t.insert(7, "x")
    assert t.root is not root
    assert t.lookup(7) == Found("x")


def test_remove_all_leaves_root_absent_or_null():
    t = Ctrie(hash_fn=ident)
    keys = [1, 33, 65, 2, 1 << 10, 3 << 10]
    for k in keys:
        t.insert(k, k)
    for k in keys:
        assert t.remove(k) == Found(k)
    r = t.root
    assert r is None or r.main is None
    assert validator.state_metrics(t).l == 0
