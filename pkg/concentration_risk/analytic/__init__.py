"""
First-order analytic granularity adjustments.
"""
from concentration_risk.analytic.actuarial import IrbInputs, ga_first_order_actuarial, irb_inputs
from concentration_risk.analytic.mtm import ga_first_order_mtm, obligor_moments, pi_derivatives

__all__ = ['IrbInputs', 'ga_first_order_actuarial', 'ga_first_order_mtm', 'irb_inputs', 'obligor_moments',
           'pi_derivatives']
