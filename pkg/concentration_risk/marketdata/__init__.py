"""
Yield curves and market data downloads.
"""
from concentration_risk.marketdata.client import MarketDataClient
from concentration_risk.marketdata.curves import FLAT, NSS, YieldCurve, load_yield_curve, save_yield_curve
from concentration_risk.marketdata.fed import FederalReserveCurveClient, parse_nss_table

__all__ = [
    'FLAT', 'FederalReserveCurveClient', 'MarketDataClient', 'NSS', 'YieldCurve', 'load_yield_curve',
    'parse_nss_table', 'save_yield_curve',
]
