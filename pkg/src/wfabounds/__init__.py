"""Weighted finite automata: norms, Hankel spectra, Rademacher complexity and bounds."""

from .automaton import (Alphabet, LabeledSample, StringSample, WeightedAutomaton, add, conjugate,
                        evaluate, evaluate_path_sum, make_dfa, make_pfa, sample_pfa, scale,
                        validate_pfa)
from .bounds import (BoundQuery, BoundReport, bound_An1, bound_dist_H1r, bound_dist_R1r,
                     bound_H1r, bound_H2r, bound_R1r, bound_R2r, bound_RAnr, cm_wm_lemma_check,
                     covering_number_bound, dist_params, generalization_bound, tropp_moment_bound)
from .errors import ConditioningError, DomainError, NumericError, ResourceError, WFAError
from .hankel import (gramians, hankel_singular_values, schatten_hankel_norm, truncated_hankel,
                     truncated_hankel_svd)
from .io import load_automaton, load_sample, save_automaton, save_sample
from .norms import (HolderPair, hankel_bounded, induced_matrix_norm, l2_norm_squared,
                    lp_norm_truncated, wfa_norm)
from .rademacher import (AscentConfig, RademacherEstimate, rademacher_Anpr_lower,
                         rademacher_Hpr_bound, rademacher_Rpr)
from .sample_stats import (SplitAssignment, WsResult, collision_stat, length_stat, ws_exhaustive,
                           ws_heuristic, ws_stat)

__version__ = "0.1.0"
