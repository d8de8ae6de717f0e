"""
BIP Impact - measuring the impact of Bitcoin Improvement Proposals on the
Bitcoin wealth distribution with stationarity transforms, regression cleaning
and Granger-causality testing.
"""

__version__ = "0.1.0"
