import numpy as np
import pytest

from gtdetect.corpus import Document, PhraseList
from gtdetect.pipeline import FeaturizeContext
from gtdetect.textproc import default_rules


@pytest.fixture(scope="session")
def rules():
    return default_rules()


@pytest.fixture(scope="session")
def ctx():
    return FeaturizeContext.build()


@pytest.fixture
def empty_phrases():
    return (
        PhraseList(kind="cliche"),
        PhraseList(kind="idiom"),
        PhraseList(kind="archaism"),
    )


def make_docs(texts, label=None, prefix="d"):
    return [Document(id=f"{prefix}{i}", text=t, label=label) for i, t in enumerate(texts)]


@pytest.fixture
def np_rng():
    return np.random.default_rng(12345)
