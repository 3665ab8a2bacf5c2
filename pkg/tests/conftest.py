from datetime import datetime

import pytest

from ctxact.context import Schema, categorical, cyclic, numeric, vector

BASE_T = datetime(2024, 3, 4, 7, 0, 0)

DAY = 86400.0


@pytest.fixture
def coord_schema() -> Schema:
    """user / x-y location / time-of-day, the coordinate-mode experiment shape."""
    return Schema(
        (
            categorical("user", ["resident"]),
            vector("location", [(0.0, 14.0), (0.0, 10.0)]),
            cyclic("tod", DAY),
        )
    )


@pytest.fixture
def label_schema() -> Schema:
    """user / room label / time-of-day, the categorical-mode experiment shape."""
    return Schema(
        (
            categorical("user", ["resident"]),
            categorical("room", ["kitchen", "bedroom", "bath", "unknown"]),
            cyclic("tod", DAY),
        )
    )


@pytest.fixture
def mixed_schema() -> Schema:
    """One attribute of every kind."""
    return Schema(
        (
            categorical("user", ["resident", "guest"]),
            numeric("temp", 0.0, 100.0),
            cyclic("tod", DAY),
            vector("location", [(0.0, 10.0), (0.0, 8.0)]),
        )
    )
