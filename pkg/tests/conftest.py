import logging
import os
from pathlib import Path

import pytest

from surrogate.models.trial import TrialData
from surrogate.simulation.generate import generate_trial
from surrogate.simulation.settings import get_setting

DATA_DIR = Path(__file__).resolve().parent.parent / "data"


def pytest_collection_modifyitems(config, items):
    if os.environ.get("SURROGATE_RUN_SLOW") == "1":
        return
    skip_slow = pytest.mark.skip(reason="set SURROGATE_RUN_SLOW=1 to run Monte Carlo acceptance tests")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)


@pytest.fixture(autouse=True)
def reset_package_logger():
    # the CLI detaches the package logger from the root; caplog needs it attached
    logger = logging.getLogger("surrogate")
    yield
    logger.handlers = [logging.NullHandler()]
    logger.propagate = True
    logger.setLevel(logging.NOTSET)


@pytest.fixture
def bundled_csv() -> Path:
    return DATA_DIR / "synthetic_trial.csv"


@pytest.fixture
def setting1_trial():
    return generate_trial(get_setting(1, n=400), seed=11)


@pytest.fixture
def setting3_trial():
    return generate_trial(get_setting(3, n=400), seed=12)


@pytest.fixture
def small_trial() -> TrialData:
    return TrialData.from_arrays(
        y=[27.1, 31.4, 24.9, 28.0, 30.2, 39.5, 45.0, 33.2, 41.8, 36.6],
        s=[5.0, 5.8, None, 5.2, 5.6, 6.1, 7.4, None, 6.9, 5.9],
        z=[0, 0, 0, 0, 0, 1, 1, 1, 1, 1],
    )
