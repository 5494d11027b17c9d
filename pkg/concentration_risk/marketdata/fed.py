"""
Nelson-Siegel-Svensson parameters published by the Federal Reserve Board.
"""
import io
import logging
from datetime import date as Date
from typing import Optional, Union

import pandas as pd
import requests

from concentration_risk.errors import SchemaViolationError
from concentration_risk.marketdata.client import MarketDataClient
from concentration_risk.marketdata.curves import YieldCurve

FED_BASE_URL = 'https://www.federalreserve.gov'
FED_NSS_ENDPOINT = '/data/yield-curve-tables/feds200628.csv'
NSS_COLUMNS = ('BETA0', 'BETA1', 'BETA2', 'BETA3', 'TAU1', 'TAU2')


def parse_nss_table(text: str) -> pd.DataFrame:
    """
    Parse the feds200628 table, skipping its descriptive preamble.

    Args:
        text: CSV content

    Returns:
        DataFrame: Parameter rows indexed by date, NSS columns only
    """
    lines = text.splitlines()
    header = next((i for i, line in enumerate(lines) if line.strip().startswith('Date')), None)
    if header is None:
        raise SchemaViolationError("No 'Date' header found in the yield curve parameter table")
    frame = pd.read_csv(io.StringIO('\n'.join(lines[header:])), na_values=['NA', 'NaN', ''])
    missing = [c for c in NSS_COLUMNS if c not in frame.columns]
    if missing:
        raise SchemaViolationError(f"Yield curve parameter table lacks columns {missing}")
    frame['Date'] = pd.to_datetime(frame['Date'])
    return frame.set_index('Date').sort_index()[list(NSS_COLUMNS)].dropna()


class FederalReserveCurveClient:
    """Fetches the daily NSS treasury curve parameters."""

    def __init__(self, client: Optional[MarketDataClient] = None):
        """
        Initialize the curve client.

        Args:
            client: Market data client (defaults to one pointed at the Federal Reserve)
        """
        self.client = client or MarketDataClient(FED_BASE_URL, timeout=60)
        self.logger = logging.getLogger(__name__)

    def fetch_nss(self, on: Union[str, Date]) -> YieldCurve:
        """
        NSS curve of the last business day on or before a date.

        Args:
            on: Target date (ISO string or date)

        Returns:
            YieldCurve: Curve in decimal units

        Raises:
            requests.RequestException: If the download fails
            SchemaViolationError: If no parameters exist up to the date
        """
        target = pd.Timestamp(on)
        try:
            text = self.client.get_text(FED_NSS_ENDPOINT)
        except requests.RequestException as e:
            self.logger.error(f"Could not download NSS parameters: {str(e)}")
            raise

        table = parse_nss_table(text)
        available = table.loc[:target]
        if available.empty:
            raise SchemaViolationError(f"No NSS parameters published on or before {target.date()}")
        observed = available.index[-1]
        row = available.iloc[-1]
        self.logger.info(f"Using NSS parameters of {observed.date()} for {target.date()}")
        return YieldCurve.nelson_siegel_svensson(
            row['BETA0'], row['BETA1'], row['BETA2'], row['BETA3'], row['TAU1'], row['TAU2'],
            units='percent', date=str(observed.date()))
