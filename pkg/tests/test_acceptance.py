"""Acceptance suite: one test per criterion, printing a PASS/FAIL line each.

Run with `pytest tests/test_acceptance.py -v -s`.  The statistical criteria
(9, 10, 13) are seeded and deterministic; the whole module takes roughly half
an hour on two cores, dominated by the cascade estimates and the lattice
experiment.
"""

import json

import pytest

from slepf import verify

_RESULTS = {}


def _report(num, name, rep):
    _RESULTS[num] = rep
    status = "PASS" if rep["passed"] else "FAIL"
    brief = {k: v for k, v in rep.items()
             if k not in ("details", "cases", "sizes", "checks")}
    print(f"\nACCEPTANCE {num:2d} [{name}]: {status} "
          f"({rep.get('runtime_s', '?')} s) {json.dumps(brief, default=str)}")
    assert rep["passed"], f"criterion {num} ({name}) failed: {rep}"


def test_criterion_01_params_exactness():
    _report(1, "parameter exactness", verify.suite_params())


def test_criterion_02_pde_residuals():
    _report(2, "PDE residual suite", verify.suite_pde())


def test_criterion_03_mobius_covariance():
    _report(3, "covariance suite", verify.suite_cov())


def test_criterion_04_collapse_asymptotics():
    _report(4, "asymptotics suite", verify.suite_asy())


def test_criterion_05_bounds():
    _report(5, "strong and minimum-gap bounds", verify.suite_bounds())


def test_criterion_06_collapse_constant_table():
    _report(6, "C(kappa) table", verify.suite_c_kappa())


def test_criterion_07_pfaffian_identity():
    _report(7, "kappa=3 Pfaffian identity", verify.suite_pfaffian())


def test_criterion_08_loewner_engine():
    _report(8, "Loewner oracle and phases", verify.suite_loewner())


def test_criterion_09_mc_cascade():
    _report(9, "Monte-Carlo cascade vs oracle", verify.suite_mc())


def test_criterion_10_martingale():
    _report(10, "Girsanov martingale suite", verify.suite_martingale())


def test_criterion_11_fusion():
    _report(11, "fusion suite", verify.suite_fusion())


def test_criterion_12_coulomb():
    _report(12, "screening-integral oracle", verify.suite_coulomb())


@pytest.mark.slow
def test_criterion_13_ising_crossing():
    _report(13, "Ising crossing probabilities", verify.suite_ising())
