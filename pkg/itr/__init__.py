"""Individualized treatment rule loss, decisions and metrics"""
from .rules import (
    itr_loss, itr_targets, decide, accuracy, empirical_value, constant_rule_accuracy, evaluate, estimate_propensity
)

__all__ = [
    'itr_loss', 'itr_targets', 'decide', 'accuracy', 'empirical_value', 'constant_rule_accuracy', 'evaluate',
    'estimate_propensity'
]
