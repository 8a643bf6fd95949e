from .cpa import build_chosen_image, locate_black_row, recover_map_and_stream, run_cpa_attack, solve_narrow_probe
from .differential import (
    build_chosen_pair, recover_permutation_from_diff, recover_substitution_diff, run_differential_attack,
)
from .kpa import column_fingerprint, match_columns, recover_substitution_kpa, run_kpa_attack

__all__ = [
    "build_chosen_image", "locate_black_row", "recover_map_and_stream", "run_cpa_attack",
    "solve_narrow_probe", "build_chosen_pair", "recover_permutation_from_diff",
    "recover_substitution_diff", "run_differential_attack", "column_fingerprint",
    "match_columns", "recover_substitution_kpa", "run_kpa_attack",
]
