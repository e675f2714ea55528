"""Security technical-debt assessment for smart contracts.

Principal is the gas (and fiat fee) of redeploying a contract; interest is a
CWSS score weighted by the contract's activity and lifespan.
"""

__version__ = "0.1.0"
