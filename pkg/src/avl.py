"""Persistent AVL map from variable id to term.

Nodes are never mutated once built. An insert copies the nodes on the path
from the root to the new leaf and shares every other subtree with the old
version, so any number of threads may keep reading older roots.
"""
from __future__ import annotations

from typing import Any, Iterator, NamedTuple

from src.exceptions import DuplicateKeyError


class _Empty:
    """The empty tree (a singleton)."""

    __slots__ = ()
    _instance: _Empty | None = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = object.__new__(cls)
        return cls._instance

    height = 0

    def __bool__(self) -> bool:
        return False

    def __repr__(self) -> str:
        return "EMPTY"


EMPTY = _Empty()


class AvlNode(NamedTuple):
    key: int
    value: Any
    left: AvlNode | _Empty
    right: AvlNode | _Empty
    height: int

    def __repr__(self) -> str:
        return f"{self.__class__.__name__}(key={self.key!r}, height={self.height})"


Tree = AvlNode | _Empty


def empty() -> Tree:
    return EMPTY


def height(root: Tree) -> int:
    return root.height


def _node(key: int, value: Any, left: Tree, right: Tree) -> AvlNode:
    return AvlNode(key, value, left, right, max(left.height, right.height) + 1)


def _rotate_right(key, value, left: AvlNode, right: Tree) -> AvlNode:
    return _node(left.key, left.value, left.left, _node(key, value, left.right, right))


def _rotate_left(key, value, left: Tree, right: AvlNode) -> AvlNode:
    return _node(right.key, right.value, _node(key, value, left, right.left), right.right)


def _balance(key: int, value: Any, left: Tree, right: Tree) -> AvlNode:
    diff = left.height - right.height
    if diff > 1:
        if left.right.height > left.left.height:
            # left-right case
            pivot = left.right
            return _node(
                pivot.key,
                pivot.value,
                _node(left.key, left.value, left.left, pivot.left),
                _node(key, value, pivot.right, right),
            )
        return _rotate_right(key, value, left, right)
    if diff < -1:
        if right.left.height > right.right.height:
            # right-left case
            pivot = right.left
            return _node(
                pivot.key,
                pivot.value,
                _node(key, value, left, pivot.left),
                _node(right.key, right.value, pivot.right, right.right),
            )
        return _rotate_left(key, value, left, right)
    return _node(key, value, left, right)


def insert(root: Tree, key: int, value: Any) -> AvlNode:
    """Return a new root holding ``key -> value``; ``root`` stays untouched."""
    if root is EMPTY:
        return AvlNode(key, value, EMPTY, EMPTY, 1)
    if key < root.key:
        return _balance(root.key, root.value, insert(root.left, key, value), root.right)
    if key > root.key:
        return _balance(root.key, root.value, root.left, insert(root.right, key, value))
    raise DuplicateKeyError(key)


def lookup(root: Tree, key: int) -> Any | None:
    node = root
    while node is not EMPTY:
        if key < node.key:
            node = node.left
        elif key > node.key:
            node = node.right
        else:
            return node.value
    return None


def size(root: Tree) -> int:
    return sum(1 for _ in nodes(root))


def nodes(root: Tree) -> Iterator[AvlNode]:
    """In-order traversal of the nodes."""
    stack: list[AvlNode] = []
    node = root
    while stack or node is not EMPTY:
        while node is not EMPTY:
            stack.append(node)
            node = node.left
        node = stack.pop()
        yield node
        node = node.right


def items(root: Tree) -> Iterator[tuple[int, Any]]:
    for node in nodes(root):
        yield node.key, node.value
