"""
Evaluation protocol: error tables, convergence traces and sensitivities.
"""
from concentration_risk.evaluation.convergence import convergence_trace
from concentration_risk.evaluation.harness import EvaluationReport, evaluate_methods, summarize_errors
from concentration_risk.evaluation.report import render_text, write_report
from concentration_risk.evaluation.sensitivity import (SensitivityReport, bump_weight, downgrade,
                                                       sensitivity_battery)

__all__ = [
    'EvaluationReport', 'SensitivityReport', 'bump_weight', 'convergence_trace', 'downgrade',
    'evaluate_methods', 'render_text', 'sensitivity_battery', 'summarize_errors', 'write_report',
]
