"""
HTTP client for market data downloads.
"""
import logging
from typing import Any, Dict, Optional

import requests


class MarketDataClient:
    """Client for fetching published market data files."""

    def __init__(self, base_url: str, timeout: int = 30, session: Optional[requests.Session] = None):
        """
        Initialize the market data client.

        Args:
            base_url: Base URL of the data provider
            timeout: Request timeout in seconds
            session: Existing session to reuse (optional)
        """
        self.base_url = base_url.rstrip('/')
        self.timeout = timeout
        self.session = session or requests.Session()
        self.logger = logging.getLogger(__name__)

    def get(self, endpoint: str, params: Optional[Dict[str, Any]] = None,
            headers: Optional[Dict[str, str]] = None, timeout: Optional[int] = None) -> requests.Response:
        """
        Send a GET request and fail on non-2xx responses.

        Args:
            endpoint: Path appended to the base URL
            params: Query parameters
            headers: Request headers
            timeout: Request timeout in seconds (overrides default)

        Returns:
            Response: HTTP response object

        Raises:
            requests.RequestException: If the request fails or returns an error status
        """
        url = f"{self.base_url}{endpoint}"
        if timeout is None:
            timeout = self.timeout

        self.logger.info(f"Sending GET request to {url}")
        if params:
            self.logger.debug(f"Params: {params}")

        try:
            response = self.session.get(url, params=params, headers=headers, timeout=timeout)
            self.logger.info(f"Received response: {response.status_code}")
            response.raise_for_status()
            self.logger.debug(f"Received {len(response.content)} bytes from {url}")
            return response
        except requests.RequestException as e:
            self.logger.error(f"Request failed: {str(e)}")
            raise

    def get_text(self, endpoint: str, **kwargs) -> str:
        """
        Fetch a text resource.

        Args:
            endpoint: Path appended to the base URL
            **kwargs: Additional arguments for get

        Returns:
            str: Decoded response body
        """
        response = self.get(endpoint, **kwargs)
        return response.content.decode('utf-8', errors='replace')

    def close(self):
        """Close the session."""
        self.session.close()
        self.logger.info("Market data client session closed")
