import pytest
from hypothesis import HealthCheck, settings

from ruindiv import Exponential, Gamma, Lomax, ProcessModel, ScaleEvaluator

settings.register_profile(
    "repo",
    deadline=None,
    max_examples=25,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.function_scoped_fixture],
)
settings.load_profile("repo")


def example1_model():
    return ProcessModel.cramer_lundberg(1.0, 1.0, Lomax(1.0, 1.5))


def example2_model():
    return ProcessModel.cramer_lundberg_diffusion(1.0, 0.4, Gamma(2.0, 1.0), 0.5, orientation="dual")


def example2_cl_model():
    return ProcessModel.cramer_lundberg(1.0, 0.4, Gamma(2.0, 1.0), orientation="dual")


def exp_model():
    return ProcessModel.cramer_lundberg(1.5, 1.0, Exponential(2.0))


def diffusion_model():
    return ProcessModel.cramer_lundberg_diffusion(0.3, 0.0, None, 0.8)


@pytest.fixture(scope="session")
def ev1():
    return ScaleEvaluator(example1_model(), 0.05)


@pytest.fixture(scope="session")
def ev2():
    return ScaleEvaluator(example2_model(), 0.03)


@pytest.fixture(scope="session")
def ev2_cl():
    return ScaleEvaluator(example2_cl_model(), 0.03)


@pytest.fixture(scope="session")
def ev3():
    return ScaleEvaluator(ProcessModel.stable(1.5), 0.1)


@pytest.fixture(scope="session")
def ev_exp():
    return ScaleEvaluator(exp_model(), 0.2)


@pytest.fixture(scope="session")
def ev_diff():
    return ScaleEvaluator(diffusion_model(), 0.1)


@pytest.fixture(scope="session")
def ev_exp_num():
    return ScaleEvaluator(exp_model(), 0.2, method="numeric-inversion")


@pytest.fixture(scope="session")
def ev_diff_num():
    return ScaleEvaluator(diffusion_model(), 0.1, method="numeric-inversion")


@pytest.fixture(scope="session")
def ev3_num():
    return ScaleEvaluator(ProcessModel.stable(1.5), 0.1, method="numeric-inversion")
