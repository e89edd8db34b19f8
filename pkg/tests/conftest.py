import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from speakerkit.corpus import generate_corpus
from speakerkit.embedding import BaselineBackend


@pytest.fixture(scope="session")
def backend():
    return BaselineBackend()


@pytest.fixture(scope="session")
def corpus3():
    """Three-voice, eight-turn synthetic corpus (fixed seed)."""
    return generate_corpus(voices=3, turns=8, seed=1234)
