import pytest

from twistvan.curve_model import load_curve


@pytest.fixture(scope="session")
def e11():
    return load_curve("11A")


@pytest.fixture(scope="session")
def e307():
    return load_curve("307A")


@pytest.fixture(scope="session")
def workdir(tmp_path_factory):
    return tmp_path_factory.mktemp("twistvan")
