import pytest

from swinglab.synth import default_config, generate_dataset, write_dataset


@pytest.fixture(scope="session")
def default_dataset():
    """The stock seed-42 dataset, generated once for the whole run."""
    return generate_dataset(default_config(42))


@pytest.fixture(scope="session")
def dataset_dir(tmp_path_factory, default_dataset):
    out = tmp_path_factory.mktemp("data") / "synth42"
    write_dataset(default_dataset, out)
    return out


@pytest.fixture(scope="session")
def small_dataset_dir(tmp_path_factory):
    """Eight participants, short sessions: cheap, yet every 3-fold plan
    keeps both skill classes in each training split."""
    cfg = default_config(7, overrides={"n_participants": 8, "session_plan": [3, 3, 4]})
    out = tmp_path_factory.mktemp("smalldata") / "synth7"
    write_dataset(generate_dataset(cfg), out)
    return out
