from __future__ import annotations

import random

import pytest  # type: ignore

from src import avl
from src.exceptions import DuplicateKeyError
from src.testdata import assert_avl, new_node_count


def check_path(root: avl.Tree, key: int) -> None:
    """Balance and stored heights on the search path of ``key`` and its neighbours."""
    node = root
    while node is not avl.EMPTY:
        for n in (node, node.left, node.right):
            if n is not avl.EMPTY:
                assert abs(n.left.height - n.right.height) <= 1
                assert n.height == max(n.left.height, n.right.height) + 1
        if key == node.key:
            return
        node = node.left if key < node.key else node.right
    pytest.fail(f"key {key} not on its own search path")


class TestEmpty:
    def test_lookup(self):
        assert avl.lookup(avl.empty(), 0) is None

    def test_size(self):
        assert avl.size(avl.empty()) == 0

    def test_single_insert(self):
        assert avl.lookup(avl.insert(avl.empty(), 3, 5), 3) == 5


class TestInsert:
    def test_duplicate_key(self):
        root = avl.insert(avl.empty(), 1, "a")
        with pytest.raises(DuplicateKeyError):
            avl.insert(root, 1, "b")

    def test_ascending_keys_stay_balanced(self):
        root = avl.empty()
        for key in range(1024):
            root = avl.insert(root, key, key)
        assert_avl(root)
        assert root.height == 11

    def test_rotations(self):
        """
        Test the four rebalancing cases on three-key trees.
        """
        for order in ([1, 2, 3], [3, 2, 1], [1, 3, 2], [3, 1, 2]):
            root = avl.empty()
            for key in order:
                root = avl.insert(root, key, str(key))
            assert root.key == 2
            assert root.height == 2
            assert [k for k, _ in avl.items(root)] == [1, 2, 3]

    def test_balanced_after_every_insert(self):
        rng = random.Random(7)
        keys = rng.sample(range(10_000), 2_000)
        root = avl.empty()
        for key in keys:
            old = root
            root = avl.insert(root, key, -key)
            assert_avl(root)
            assert new_node_count(old, root) <= old.height + 2

    def test_hundred_thousand_random_inserts(self):
        """
        Test balance along every insert path over 10^5 randomized inserts,
        with a full check at the end.
        """
        rng = random.Random(11)
        keys = rng.sample(range(10**7), 10**5)
        root = avl.empty()
        for key in keys:
            root = avl.insert(root, key, key)
            check_path(root, key)
        assert_avl(root)
        assert avl.size(root) == 10**5
        # 1.44 log2(n) bounds the height of an AVL tree
        assert root.height <= 25


class TestPersistence:
    def test_old_versions_unchanged(self):
        """
        Test every snapshot against an association-list oracle.
        """
        rng = random.Random(3)
        root = avl.empty()
        oracle: list[tuple[int, int]] = []
        snapshots = []
        for key in rng.sample(range(500), 200):
            snapshots.append((root, list(oracle)))
            root = avl.insert(root, key, key * 2)
            oracle.append((key, key * 2))
        for snapshot, pairs in snapshots:
            assert sorted(avl.items(snapshot)) == sorted(pairs)
            mapping = dict(pairs)
            for k in range(500):
                assert avl.lookup(snapshot, k) == mapping.get(k)

    def test_structure_sharing(self):
        root = avl.empty()
        for key in range(100):
            root = avl.insert(root, key, key)
        bigger = avl.insert(root, 1000, 1000)
        assert new_node_count(root, bigger) <= root.height + 2
        assert avl.size(root) == 100
