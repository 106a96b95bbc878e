from fractions import Fraction

import numpy as np
import pytest

from gwcls import (
    model_equal_pair,
    model_equal_pair_null_immigration,
    model_general,
    model_unit_total,
)


@pytest.fixture(scope="session")
def model_a():
    return model_general(0.3)


@pytest.fixture(scope="session")
def model_b():
    return model_unit_total(0.6)


@pytest.fixture(scope="session")
def model_c():
    return model_equal_pair()


@pytest.fixture(scope="session")
def model_c_null():
    return model_equal_pair_null_immigration()


def exact_moments(law):
    """Mean and covariance with rational arithmetic over the atoms."""
    atoms = [(a, Fraction(p).limit_denominator(10**9)) for a, p in law.atoms]
    m = [sum(p * a[i] for a, p in atoms) for i in range(2)]
    cov = [[sum(p * (a[i] - m[i]) * (a[j] - m[j]) for a, p in atoms) for j in range(2)] for i in range(2)]
    return np.array([float(v) for v in m]), np.array([[float(v) for v in row] for row in cov])


# -- full-size experiments shared by the harness and acceptance tests ---------

ACCEPTANCE_LINES = []


def record_acceptance(number, passed, detail):
    line = f"{'PASS' if passed else 'FAIL'} criterion {number}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return passed


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)


def _experiment(spec, label, seed):
    from gwcls.harness import ExperimentConfig, run_experiment

    cfg = ExperimentConfig(spec, n_values=(200, 2000), replicas=5000, limit_paths=5000, seed=seed, model_label=label)
    return run_experiment(cfg)


@pytest.fixture(scope="session")
def experiment_a(model_a):
    return _experiment(model_a, "general", seed=101)


@pytest.fixture(scope="session")
def experiment_b(model_b):
    return _experiment(model_b, "unit_total", seed=102)


@pytest.fixture(scope="session")
def experiment_c(model_c):
    return _experiment(model_c, "equal_pair", seed=103)
