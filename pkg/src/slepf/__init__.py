"""Multiple-SLE pure partition functions.

Exact hypergeometric formulas (N <= 2), a Monte-Carlo cascade estimator built
on a Loewner-chain engine, screening-integral evaluation for kappa in (4, 8),
finite-difference verification of the defining PDE/covariance/asymptotics
properties, fusion limits, and a critical Ising lattice simulator whose
interface-connectivity distribution these functions predict.
"""

from .exact_pf import (PATTERN_NESTED, PATTERN_SEP, PartitionFnEstimate,
                       c_kappa, pfaffian_form, transport_polygon, z_four,
                       z_pair, z_total, z_value)
from .linkpat import (LinkPattern, ValencedLinkPattern, collapse_map,
                      enumerate_patterns, parse_pattern, remove_link,
                      side_split)
from .params import KappaParams, derive_params, kac_weight
from .mc_pf import CascadeConfig, estimate_z, symmetry_check

__all__ = [
    "CascadeConfig", "KappaParams", "LinkPattern", "PATTERN_NESTED",
    "PATTERN_SEP", "PartitionFnEstimate", "ValencedLinkPattern", "c_kappa",
    "collapse_map", "derive_params", "enumerate_patterns", "estimate_z",
    "kac_weight", "parse_pattern", "pfaffian_form", "remove_link",
    "side_split", "symmetry_check", "transport_polygon", "z_four", "z_pair",
    "z_total", "z_value",
]

__version__ = "0.1.0"
