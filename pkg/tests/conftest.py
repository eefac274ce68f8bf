"""Shared fixtures: small datasets and quickly trained models.

Session-scoped so the expensive pieces (simulation, short training runs)
happen once; tests must treat them as read-only.
"""

import numpy as np
import pytest

from form_lab.datasets import DatasetSpec, generate, holdout_split
from form_lab.training import TrainConfig, train


@pytest.fixture(scope="session")
def tiny_onedot():
    spec = DatasetSpec(kind="onedot", n_points=8, n_steps=25, seed=3)
    return spec, generate(spec)


@pytest.fixture(scope="session")
def tiny_halfmoons():
    spec = DatasetSpec(kind="halfmoons", n_points=8, n_steps=25, seed=3)
    return spec, generate(spec)


@pytest.fixture(scope="session")
def tiny_spiral():
    spec = DatasetSpec(kind="spiral", n_points=8, n_steps=25, seed=3)
    return spec, generate(spec)


@pytest.fixture(scope="session")
def tiny_models(tiny_onedot):
    """One quickly trained model per method, all on the same tiny dataset."""
    spec, records = tiny_onedot
    train_records, _ = holdout_split(records)
    models = {}
    for method in ("o1", "o1o2", "form"):
        config = TrainConfig(method=method, steps=60, batch_size=16, seed=11)
        models[method] = train(train_records, config, dataset_info=spec.to_dict())
    return models
