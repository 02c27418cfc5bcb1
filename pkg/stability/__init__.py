"""Weight-stability bounds and sensitivity budgets"""
from .bounds import (
    empirical_w1_w2, bound_ipw_randomized, bound_ipw_known, bound_ipw_estimated, bound_mmd, bound_ebw,
    lambda_min_second_moment, ebw_lambda_min, base_ratio, scheme_l2_bound, sample_dual_ball, dual_gradient_shift
)
from .budgets import (
    budget_universal, budget_data_independent, budget_from_scheme, budget_ipw_randomized, budget_for_config, default_w_max
)

__all__ = [
    'empirical_w1_w2', 'bound_ipw_randomized', 'bound_ipw_known', 'bound_ipw_estimated', 'bound_mmd', 'bound_ebw',
    'lambda_min_second_moment', 'ebw_lambda_min', 'base_ratio', 'scheme_l2_bound', 'sample_dual_ball',
    'dual_gradient_shift', 'budget_universal', 'budget_data_independent', 'budget_from_scheme',
    'budget_ipw_randomized', 'budget_for_config', 'default_w_max'
]
