import numpy as np
import pytest

from fmol.patch import default_patch


@pytest.fixture
def patch():
    return default_patch()


@pytest.fixture(autouse=True)
def _np_errstate():
    with np.errstate(over="raise", invalid="raise", divide="raise"):
        yield
