"""ov-approx - approximate counting, decision and Max-IP for binary vector families"""

import logging

__version__ = "0.1.0"

from .client import OVToolkit
from .config import Settings
from .exceptions import (CertificationError, ConfigurationError, DatasetFormatError,
                         InvalidArgumentError, OVApproxError, ProofSpaceOverflowError,
                         ResourceLimitError)
from .managers import CountingManager, DecisionManager, MaxIPManager, PolynomialManager
from .models import (BitVector, CertificationReport, CountEstimate, DisjProbPoly, F2Matrix,
                     GapIpChallenge, GroupedAcceptMatrix, MaxIpResult, OrPolynomial,
                     OvDecideParams, OvDecisionReport, ProofList, RunConfig,
                     SampledCountEstimate, SatisfyingPairReport, Sketch, SubsetIndex,
                     VectorFamily)
from .rng import SeededRng

logging.getLogger(__name__).addHandler(logging.NullHandler())

__all__ = [
    "OVToolkit",
    "Settings",
    "SeededRng",
    "OVApproxError",
    "InvalidArgumentError",
    "DatasetFormatError",
    "ConfigurationError",
    "ResourceLimitError",
    "ProofSpaceOverflowError",
    "CertificationError",
    "PolynomialManager",
    "CountingManager",
    "DecisionManager",
    "MaxIPManager",
    "BitVector",
    "VectorFamily",
    "SubsetIndex",
    "OrPolynomial",
    "CertificationReport",
    "Sketch",
    "CountEstimate",
    "SampledCountEstimate",
    "DisjProbPoly",
    "F2Matrix",
    "OvDecideParams",
    "OvDecisionReport",
    "GapIpChallenge",
    "ProofList",
    "GroupedAcceptMatrix",
    "SatisfyingPairReport",
    "MaxIpResult",
    "RunConfig",
]
