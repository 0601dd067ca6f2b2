import numpy as np
import pytest

from newtsynth import Model, bake_bank, load_model, random_model, save_model

FIXTURE_SEED = 7


@pytest.fixture(scope="session")
def fixture_bytes() -> bytes:
    config, tensors, stats = random_model(seed=FIXTURE_SEED)
    return save_model(config, tensors, stats)


@pytest.fixture(scope="session")
def fixture_model(fixture_bytes) -> Model:
    model = Model(load_model(fixture_bytes))
    model.tables = bake_bank(model.shapers)
    return model


@pytest.fixture(scope="session")
def fixture_model_path(fixture_bytes, tmp_path_factory):
    path = tmp_path_factory.mktemp("models") / "fixture.newt"
    path.write_bytes(fixture_bytes)
    return path


@pytest.fixture()
def rng():
    return np.random.default_rng(0xC0FFEE)
