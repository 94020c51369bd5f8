import pytest

from lyfe.embedding import HashedBagProvider
from lyfe.lang import LanguageError, LanguageProvider, TemplateSet


@pytest.fixture(scope="session")
def provider():
    return HashedBagProvider()


@pytest.fixture(scope="session")
def templates():
    return TemplateSet.builtin()


class FailingProvider(LanguageProvider):
    """Raises on every call; exercises fail-open paths."""

    name = "failing"

    def _respond(self, rendered, prompt):
        raise LanguageError("injected failure")


@pytest.fixture()
def failing_lm():
    return FailingProvider()
