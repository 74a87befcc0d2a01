"""CART decision trees and random forests.

Gini-impurity CART with binary splits at midpoints of adjacent distinct
values. One-hot columns (values in {0,1}) take a fast counting path; general
columns use a sort-and-sweep. Leaves predict the majority class, ties going to
the lower class index. The growth loop is compiled with numba; all randomness
(bootstrap resampling, per-node feature subsets) comes from an explicit
xorshift stream so runs are bit-reproducible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numba import njit

from mdbench.seeding import substream, substream_seed

__all__ = [
    "TreeParams",
    "ForestParams",
    "DecisionTreeModel",
    "RandomForestModel",
    "train_decision_tree",
    "train_random_forest",
    "gini",
]

NO_DEPTH_LIMIT = 1 << 30


@dataclass(frozen=True)
class TreeParams:
    max_depth: int | None = None  # None = unlimited
    min_samples_split: int = 2

    def __post_init__(self):
        if self.max_depth is not None and self.max_depth < 1:
            raise ValueError("max_depth must be >= 1 or None")
        if self.min_samples_split < 2:
            raise ValueError("min_samples_split must be >= 2")


@dataclass(frozen=True)
class ForestParams:
    n_trees: int = 100
    mtry_rule: str = "sqrt"  # sqrt | log2 | all
    bootstrap: bool = True
    tree: TreeParams = field(default_factory=TreeParams)
    seed: int = 0

    def __post_init__(self):
        if self.n_trees < 1:
            raise ValueError("n_trees must be >= 1")
        if self.mtry_rule not in ("sqrt", "log2", "all"):
            raise ValueError(f"unknown mtry_rule {self.mtry_rule!r}")


def gini(counts) -> float:
    """Gini impurity of a class-count vector."""
    counts = np.asarray(counts, dtype=np.float64)
    n = counts.sum()
    if n == 0:
        return 0.0
    p = counts / n
    return float(1.0 - (p * p).sum())


@njit(cache=True)
def _xorshift(state):
    # xorshift64; uint64 arithmetic wraps mod 2**64
    state ^= state << np.uint64(13)
    state ^= state >> np.uint64(7)
    state ^= state << np.uint64(17)
    return state


@njit(cache=True)
def _grow(X, y, n_classes, max_depth, min_samples_split, mtry, rng_state, is_binary):
    """Grow one CART tree; returns flat node arrays.

    node arrays: feature (-1 for leaf), threshold, left, right, leaf_class.
    """
    n, d = X.shape
    cap = 2 * n + 1
    feature = np.full(cap, -1, dtype=np.int64)
    threshold = np.zeros(cap, dtype=np.float64)
    left = np.full(cap, -1, dtype=np.int64)
    right = np.full(cap, -1, dtype=np.int64)
    leaf_class = np.zeros(cap, dtype=np.int64)
    n_nodes = 0

    idx = np.arange(n)
    # work stack: (node_id, start, end, depth)
    stack = np.zeros((cap, 4), dtype=np.int64)
    stack[0] = (0, 0, n, 0)
    top = 1
    n_nodes = 1

    feats = np.arange(d)
    counts = np.zeros(n_classes, dtype=np.int64)
    left_counts = np.zeros(n_classes, dtype=np.int64)
    bin_left = np.zeros(n_classes, dtype=np.int64)

    while top > 0:
        top -= 1
        node, start, end, depth = stack[top]
        m = end - start

        counts[:] = 0
        for i in range(start, end):
            counts[y[idx[i]]] += 1
        best_c = 0
        for c in range(1, n_classes):
            if counts[c] > counts[best_c]:
                best_c = c
        leaf_class[node] = best_c

        parent_gini = 1.0
        for c in range(n_classes):
            p = counts[c] / m
            parent_gini -= p * p

        if depth >= max_depth or m < min_samples_split or parent_gini <= 0.0:
            continue

        # feature subset: partial Fisher-Yates over a persistent index array
        if mtry < d:
            for t in range(mtry):
                rng_state = _xorshift(rng_state)
                r = t + int(rng_state % np.uint64(d - t))
                tmp = feats[t]
                feats[t] = feats[r]
                feats[r] = tmp

        best_score = np.inf
        best_f = -1
        best_thr = 0.0
        for t in range(mtry):
            f = feats[t]
            if is_binary[f]:
                # single candidate threshold at 0.5
                bin_left[:] = 0
                nl = 0
                for i in range(start, end):
                    if X[idx[i], f] <= 0.5:
                        bin_left[y[idx[i]]] += 1
                        nl += 1
                nr = m - nl
                if nl == 0 or nr == 0:
                    continue
                gl = 1.0
                gr = 1.0
                for c in range(n_classes):
                    pl = bin_left[c] / nl
                    pr = (counts[c] - bin_left[c]) / nr
                    gl -= pl * pl
                    gr -= pr * pr
                score = (nl * gl + nr * gr) / m
                if score < best_score - 1e-15:
                    best_score = score
                    best_f = f
                    best_thr = 0.5
            else:
                vals = np.empty(m, dtype=np.float64)
                labs = np.empty(m, dtype=np.int64)
                for i in range(m):
                    vals[i] = X[idx[start + i], f]
                    labs[i] = y[idx[start + i]]
                order = np.argsort(vals, kind="mergesort")
                left_counts[:] = 0
                nl = 0
                for oi in range(m - 1):
                    o = order[oi]
                    left_counts[labs[o]] += 1
                    nl += 1
                    v_here = vals[o]
                    v_next = vals[order[oi + 1]]
                    if v_next <= v_here:
                        continue
                    nr = m - nl
                    gl = 1.0
                    gr = 1.0
                    for c in range(n_classes):
                        pl = left_counts[c] / nl
                        pr = (counts[c] - left_counts[c]) / nr
                        gl -= pl * pl
                        gr -= pr * pr
                    score = (nl * gl + nr * gr) / m
                    if score < best_score - 1e-15:
                        best_score = score
                        best_f = f
                        best_thr = 0.5 * (v_here + v_next)

        if best_f < 0 or best_score >= parent_gini - 1e-15:
            continue  # no strict impurity decrease

        # partition idx[start:end] around the chosen split, order-preserving
        buf = np.empty(m, dtype=np.int64)
        nl = 0
        nr = 0
        for i in range(start, end):
            if X[idx[i], best_f] <= best_thr:
                idx[start + nl] = idx[i]
                nl += 1
            else:
                buf[nr] = idx[i]
                nr += 1
        for i in range(nr):
            idx[start + nl + i] = buf[i]

        lid = n_nodes
        rid = n_nodes + 1
        n_nodes += 2
        feature[node] = best_f
        threshold[node] = best_thr
        left[node] = lid
        right[node] = rid
        stack[top] = (lid, start, start + nl, depth + 1)
        top += 1
        stack[top] = (rid, start + nl, end, depth + 1)
        top += 1

    return feature[:n_nodes], threshold[:n_nodes], left[:n_nodes], right[:n_nodes], leaf_class[:n_nodes], rng_state


@njit(cache=True)
def _predict_tree(feature, threshold, left, right, leaf_class, X):
    n = X.shape[0]
    out = np.empty(n, dtype=np.int64)
    for i in range(n):
        node = 0
        while feature[node] >= 0:
            if X[i, feature[node]] <= threshold[node]:
                node = left[node]
            else:
                node = right[node]
        out[i] = leaf_class[node]
    return out


def _binary_flags(X: np.ndarray) -> np.ndarray:
    """Columns whose values are all in {0, 1} (one-hot/indicator fast path)."""
    return np.array(
        [bool(np.all((col == 0.0) | (col == 1.0))) for col in X.T], dtype=np.bool_
    )


def _resolve_mtry(rule: str, d: int) -> int:
    if rule == "all":
        return d
    if rule == "sqrt":
        return max(1, int(math.sqrt(d)))
    return max(1, int(math.log2(d))) if d > 1 else 1


@dataclass
class DecisionTreeModel:
    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    leaf_class: np.ndarray
    n_classes: int
    params: TreeParams

    def predict(self, X: np.ndarray) -> np.ndarray:
        X = np.ascontiguousarray(X, dtype=np.float64)
        return _predict_tree(
            self.feature, self.threshold, self.left, self.right, self.leaf_class, X
        )

    @property
    def depth(self) -> int:
        d = np.zeros(len(self.feature), dtype=np.int64)
        for node in range(len(self.feature)):
            if self.feature[node] >= 0:
                d[self.left[node]] = d[node] + 1
                d[self.right[node]] = d[node] + 1
        return int(d.max())


def _grow_one(X, y, n_classes, tree_params, mtry, seed, is_binary):
    max_depth = tree_params.max_depth if tree_params.max_depth is not None else NO_DEPTH_LIMIT
    feats, thr, left, right, leaf, _ = _grow(
        X,
        y,
        n_classes,
        max_depth,
        tree_params.min_samples_split,
        mtry,
        np.uint64(seed | 1),
        is_binary,
    )
    return DecisionTreeModel(feats, thr, left, right, leaf, n_classes, tree_params)


def train_decision_tree(X, y, n_classes: int, params: TreeParams | None = None) -> DecisionTreeModel:
    """Train a CART tree on all features (deterministic; no randomness consumed)."""
    params = params or TreeParams()
    X = np.ascontiguousarray(X, dtype=np.float64)
    y = np.ascontiguousarray(y, dtype=np.int64)
    if X.shape[0] == 0:
        raise ValueError("empty training matrix")
    return _grow_one(X, y, n_classes, params, X.shape[1], 1, _binary_flags(X))


@dataclass
class RandomForestModel:
    trees: list
    n_classes: int
    params: ForestParams

    def predict(self, X: np.ndarray) -> np.ndarray:
        X = np.ascontiguousarray(X, dtype=np.float64)
        votes = np.zeros((X.shape[0], self.n_classes), dtype=np.int64)
        for t in self.trees:
            pred = _predict_tree(t.feature, t.threshold, t.left, t.right, t.leaf_class, X)
            votes[np.arange(X.shape[0]), pred] += 1
        return votes.argmax(axis=1)  # argmax ties -> lower class index


def train_random_forest(X, y, n_classes: int, params: ForestParams | None = None) -> RandomForestModel:
    """Bagged CART trees with per-node random feature subsets."""
    params = params or ForestParams()
    X = np.ascontiguousarray(X, dtype=np.float64)
    y = np.ascontiguousarray(y, dtype=np.int64)
    if X.shape[0] == 0:
        raise ValueError("empty training matrix")
    n, d = X.shape
    mtry = _resolve_mtry(params.mtry_rule, d)
    is_binary = _binary_flags(X)
    trees = []
    for t in range(params.n_trees):
        if params.bootstrap:
            rng = substream(params.seed, "bootstrap", t)
            sample = np.sort(rng.integers(0, n, size=n))
            Xt, yt = np.ascontiguousarray(X[sample]), y[sample]
        else:
            Xt, yt = X, y
        node_seed = substream_seed(params.seed, "tree", t)
        trees.append(_grow_one(Xt, yt, n_classes, params.tree, mtry, node_seed, is_binary))
    return RandomForestModel(trees, n_classes, params)
