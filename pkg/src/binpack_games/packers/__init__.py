from .sequential import first_fit, next_fit, nfd, nfi, ffd, scaled_sizes
from .subset import (TieBreak, SearchLimitExceeded, max_weight_subset, max_subset_weight, best_subsets,
                     DEFAULT_ITEM_LIMIT, DEFAULT_NODE_LIMIT)
from .gsc import gsc, gsc_all, signature_of_counts, bin_weights_greedy_ok
from .steps import steps, StepsParams, PARAMS as STEPS_PARAMS
from .exact import opt_exact, OptIncomplete, size_lower_bound

__all__ = [
    "first_fit", "next_fit", "nfd", "nfi", "ffd", "scaled_sizes",
    "TieBreak", "SearchLimitExceeded", "max_weight_subset", "max_subset_weight", "best_subsets",
    "DEFAULT_ITEM_LIMIT", "DEFAULT_NODE_LIMIT",
    "gsc", "gsc_all", "signature_of_counts", "bin_weights_greedy_ok",
    "steps", "StepsParams", "STEPS_PARAMS",
    "opt_exact", "OptIncomplete", "size_lower_bound",
]
