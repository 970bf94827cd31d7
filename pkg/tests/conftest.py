import hypothesis.strategies as st
import pytest
from hypothesis import settings

from relqm.freeword import Word, letter_order, reduce

settings.register_profile("default", max_examples=150, deadline=None)
settings.load_profile("default")

LETTERS = letter_order(2)


def words(max_size: int = 8, min_size: int = 0):
    """Reduced words of F_2, drawn as raw letter strings and reduced."""
    return st.text(alphabet=LETTERS, min_size=min_size, max_size=max_size).map(lambda s: reduce(s, 2))


def nontrivial_words(max_size: int = 8):
    return words(max_size, 1).filter(bool)


@pytest.fixture
def W():
    return lambda t: Word(t, 2)


ACCEPTANCE: dict = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        terminalreporter.write_line(ACCEPTANCE[n])
