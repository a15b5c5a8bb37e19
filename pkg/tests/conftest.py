import json

import numpy as np
import pytest

from fractalspec import FractalMeasure, cantor_four, make_system


@pytest.fixture(scope="session")
def cantor4():
    return cantor_four()


@pytest.fixture(scope="session")
def cantor4_measure(cantor4):
    return FractalMeasure(cantor4)


@pytest.fixture(scope="session")
def odd3():
    # odd scale: passes the unitarity check, fails integrality
    return make_system(3.0, [0.0, 0.5], [0.0, 1.0])


@pytest.fixture(scope="session")
def odd3_measure(odd3):
    return FractalMeasure(odd3)


@pytest.fixture(scope="session")
def even2():
    # |R| = 2: valid system, outside the dichotomy's even clause
    return make_system(2.0, [0.0, 0.5], [0.0, 1.0])


@pytest.fixture(scope="session")
def quad2d():
    # two-dimensional four-digit system; certified only after rescaling
    return make_system(
        [[4.0, 0.0], [0.0, 4.0]],
        [[0.0, 0.0], [0.5, 0.0], [0.0, 0.5], [0.5, 0.5]],
        [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [1.0, 1.0]],
    )


@pytest.fixture
def write_system(tmp_path):
    def _write(doc, name="system.json"):
        path = tmp_path / name
        path.write_text(json.dumps(doc))
        return str(path)

    return _write


@pytest.fixture
def cantor4_file(write_system):
    return write_system({"d": 1, "R": [[4]], "B": ["0", "1/2"], "L": [0, 1]})


def grid1d(a, b, step):
    return np.arange(a, b + step / 2, step).reshape(-1, 1)
