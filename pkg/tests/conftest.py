import time
from pathlib import Path

import pytest

from fieldsense import dataset as ds
from fieldsense import forest as fr
from fieldsense import synth
from fieldsense import text as tx

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture(scope="session")
def fixtures_dir() -> Path:
    return FIXTURES


@pytest.fixture(scope="session")
def labeled_rows():
    """The nine-row hand-labeled login/registration fixture."""
    return ds.load_csv((FIXTURES / "labeled_fields.csv").read_bytes())


@pytest.fixture(scope="session")
def fixture_vocab(labeled_rows):
    return tx.build_vocabulary([r.features for r in labeled_rows])


@pytest.fixture(scope="session")
def golden_model_bytes() -> bytes:
    return (FIXTURES / "golden_model.json").read_bytes()


@pytest.fixture(scope="session")
def golden_model(golden_model_bytes):
    return fr.load(golden_model_bytes)


@pytest.fixture(scope="session")
def synth_corpus():
    """Default synthetic corpus at the documented evaluation size."""
    return synth.gen_synthetic(n=2000, noise=0.1, seed=0)


@pytest.fixture(scope="session")
def synth_split(synth_corpus):
    return ds.split(synth_corpus, 0.7, seed=0)


@pytest.fixture(scope="session")
def synth_trained(synth_split):
    """Forest trained with default hyperparameters; returns (model, test, seconds)."""
    train_rows, test_rows = synth_split
    vocabulary = tx.build_vocabulary([r.features for r in train_rows])
    encoded = [(tx.encode(r.features, vocabulary), r.target) for r in train_rows]
    classes = sorted({r.target for r in train_rows})
    started = time.perf_counter()
    model = fr.train(encoded, fr.ForestParams(seed=0), classes, vocabulary)
    elapsed = time.perf_counter() - started
    return model, test_rows, elapsed
