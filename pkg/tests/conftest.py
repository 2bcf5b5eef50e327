import numpy as np
import pytest

from wrlda import _pykernels
from wrlda.synthetic import lda_corpus

try:
    from wrlda import _kernels
except ImportError:  # extension not built
    _kernels = None

BACKENDS = [pytest.param(_pykernels, id="python"),
            pytest.param(_kernels, id="cython",
                         marks=pytest.mark.skipif(_kernels is None, reason="extension not built"))]

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(params=BACKENDS)
def kernels(request):
    return request.param


@pytest.fixture(scope="session")
def small_corpus():
    corpus, beta, theta = lda_corpus(30, 40, 3, seed=0, doc_len=(20, 40))
    return corpus


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
