from .compare import (DEFAULT_SIZES, ComparisonRow, Direction, EffectClass, EffectSize, TestResult, TTest,
                      alpha_threshold, classify_effect, cohens_d, compare_all_topics, fdr_adjust,
                      stratified_effect_size, welch_t_test)
from .tdist import betainc, t_cdf, t_two_sided_p
