"""Random forests and extremely randomized trees."""

import numpy as np
from joblib import Parallel, delayed
from typeguard import typechecked

from fatigue_automl.lib.learners.tree import TreeArrays, grow_tree
from fatigue_automl.lib.utils import derive_rng


@typechecked
def fit_forest(
    X: np.ndarray,
    y: np.ndarray,
    n_estimators: int,
    max_depth: int | None,
    min_samples_split: int,
    min_samples_leaf: int,
    max_features: float,
    bootstrap: bool,
    random_splits: bool,
    seed: int,
    jobs: int = 1,
) -> tuple[TreeArrays, ...]:
    """Grow a forest of regression trees.

    Random forests draw a bootstrap sample per tree and search the best split among a
    feature subsample at each node. Extra trees use every row and draw split thresholds
    at random.

    Args:
        X: n x d training features.
        y: n training targets.
        n_estimators: Tree count.
        max_depth: Depth cap per tree. None for unlimited.
        min_samples_split: Smallest node that may be split.
        min_samples_leaf: Smallest allowed child.
        max_features: Share of features considered at each node.
        bootstrap: Draw a bootstrap sample per tree.
        random_splits: Draw thresholds at random.
        seed: Root seed. Tree t uses the stream (seed, "tree", t).
        jobs: Worker threads. Does not change the trees.

    Returns:
        The trees, in tree-index order.
    """
    X = np.ascontiguousarray(X, dtype=np.float64)
    y = np.ascontiguousarray(y, dtype=np.float64)

    def grow(index: int) -> TreeArrays:
        rng = derive_rng(seed, "tree", index)
        samples = rng.integers(0, len(y), size=len(y)) if bootstrap else None
        return grow_tree(
            X,
            y,
            max_depth=max_depth,
            min_samples_split=min_samples_split,
            min_samples_leaf=min_samples_leaf,
            max_features=max_features,
            random_splits=random_splits,
            rng=rng,
            samples=samples,
        )

    trees = Parallel(n_jobs=jobs, prefer="threads")(
        delayed(grow)(index) for index in range(n_estimators)
    )
    return tuple(trees)

