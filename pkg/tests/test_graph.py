import numpy as np
import pytest

from diractree.graph import (
    EdgePotential,
    TreeValidationError,
    validate_tree,
    walk_spectrum,
)


def three_star(dt=1.0 / 64, lengths=(1.0, 2.0, 3.0)):
    # g1, g2 leaves; r root on the third ray
    edges = [("g1", "c", lengths[0]), ("g2", "c", lengths[1]), ("c", "r", lengths[2])]
    return validate_tree(edges, root="r", dt=dt)


def test_single_edge_smallest_tree():
    t = validate_tree([("a", "r", 1.0)], root="r", dt=1.0 / 64)
    assert len(t.boundary) == 2
    assert t.boundary == ("a", "r")
    e = t.edges[0]
    assert e.head == "a" and e.tail == "r"  # non-root end is x = 0
    assert e.length_idx == 64


def test_three_star_orientation_and_leaves():
    t = three_star()
    assert t.leaves() == ("g1", "g2")
    for leaf in ("g1", "g2"):
        e = t.leaf_edge(leaf)
        assert e.head == leaf and e.tail == "c"
    root_edge = t.leaf_edge("r")
    assert root_edge.head == "c" and root_edge.tail == "r"


def test_cycle_detected():
    edges = [("a", "b", 1.0), ("b", "c", 1.0), ("c", "a", 1.0)]
    with pytest.raises(TreeValidationError, match="cycle"):
        validate_tree(edges, root="a", dt=0.25)


def test_disconnected_detected():
    edges = [("a", "r", 1.0), ("x", "y", 1.0), ("y", "z", 1.0)]
    with pytest.raises(TreeValidationError, match="cycle|disconnected"):
        validate_tree(edges, root="r", dt=0.25)


def test_degree_two_internal_vertex_rejected():
    edges = [("a", "m", 1.0), ("m", "r", 1.0)]
    with pytest.raises(TreeValidationError, match="degree 2"):
        validate_tree(edges, root="r", dt=0.25)


def test_root_must_be_leaf():
    edges = [("a", "c", 1.0), ("b", "c", 1.0), ("c", "d", 1.0), ("e", "c", 1.0)]
    with pytest.raises(TreeValidationError, match="root"):
        validate_tree(edges, root="c", dt=0.25)


def test_non_positive_length():
    with pytest.raises(TreeValidationError, match="length"):
        validate_tree([("a", "r", -1.0)], root="r", dt=0.25)


def test_length_snapping_warns():
    t = validate_tree([("a", "r", 1.003)], root="r", dt=1.0 / 64)
    assert t.edges[0].length_idx == 64
    assert t.warnings and "snapped" in t.warnings[0]


def test_revalidation_fixed_point():
    t = three_star()
    t2 = validate_tree(
        [(e.head, e.tail, e.length) for e in t.edges],
        root=t.root,
        dt=t.dt,
        potentials=[e.potential for e in t.edges],
        edge_ids=[e.id for e in t.edges],
    )
    assert t2.boundary == t.boundary
    assert [e.length_idx for e in t2.edges] == [e.length_idx for e in t.edges]
    assert not t2.warnings


def test_orientation_distance_invariant():
    t = three_star(dt=0.125, lengths=(0.5, 0.75, 1.0))
    for e in t.edges:
        assert t.dist_idx(e.head, t.root) == t.dist_idx(e.tail, t.root) + e.length_idx


def test_potential_sample_count_enforced():
    pot = EdgePotential(np.zeros(4), np.zeros(4))  # length 1.0 at dt=0.25 needs 5
    with pytest.raises(TreeValidationError, match="samples"):
        validate_tree([("a", "r", 1.0)], root="r", dt=0.25, potentials=[pot])


# -- walk spectra -----------------------------------------------------------


def enumerate_walks(tree, a, b, hmax_idx):
    """Independent oracle: depth-first enumeration of every walk up to hmax."""
    adj = {v: [] for v in tree.vertices}
    for e in tree.edges:
        adj[e.head].append((e.tail, e.length_idx))
        adj[e.tail].append((e.head, e.length_idx))
    found = set()

    def go(v, t):
        for w, step in adj[v]:
            t2 = t + step
            if t2 > hmax_idx:
                continue
            if w == b:
                found.add(t2)
            go(w, t2)

    go(a, 0)
    return sorted(found)


def test_interval_same_leaf_spectrum():
    t = validate_tree([("a", "r", 1.0)], root="r", dt=1.0 / 64)
    got = walk_spectrum(t, "a", "a", 7.0)
    assert [i * t.dt for i in got] == [2.0, 4.0, 6.0]


def test_star_leaf_to_center():
    t = three_star(dt=1.0, lengths=(1.0, 2.0, 3.0))
    got = walk_spectrum(t, "g1", "c", 6.0)
    assert got == [1, 3, 5]


def test_star_leaf_to_leaf():
    t = three_star(dt=1.0, lengths=(1.0, 2.0, 3.0))
    got = walk_spectrum(t, "g1", "g2", 7.0)
    assert got == [3, 5, 7]


def test_spectrum_matches_bruteforce_enumeration():
    rng = np.random.default_rng(7)
    for _ in range(5):
        lengths = rng.integers(1, 4, size=3)
        t = three_star(dt=1.0, lengths=tuple(float(x) for x in lengths))
        for a in ("g1", "g2"):
            for b in ("g1", "g2", "c"):
                got = walk_spectrum(t, a, b, 9.0)
                assert got == enumerate_walks(t, a, b, 9)


def test_spectrum_five_edge_tree_vs_enumeration():
    edges = [
        ("g1", "v0", 1.0),
        ("v1", "v0", 2.0),
        ("g2", "v1", 1.0),
        ("g3", "v1", 3.0),
        ("v0", "r", 2.0),
    ]
    t = validate_tree(edges, root="r", dt=1.0)
    for a in ("g1", "g2", "g3"):
        for b in ("g1", "g2", "g3"):
            assert walk_spectrum(t, a, b, 11.0) == enumerate_walks(t, a, b, 11)


def test_spectrum_sorted_strictly_increasing():
    t = three_star(dt=1.0, lengths=(2.0, 3.0, 1.0))
    s = walk_spectrum(t, "g1", "g2", 20.0)
    assert all(x < y for x, y in zip(s, s[1:]))
