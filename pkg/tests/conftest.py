import os
import sys
import pytest
from dotenv import load_dotenv

# Add the src directory to path so the package imports without installation
sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..', 'src'))

from ruleforge.background import default_registry
from ruleforge.corpus import load_bundled
from ruleforge.rewriting import EvalBudget


@pytest.fixture(scope="session", autouse=True)
def load_env():
    """Load .env file at the start of the test session."""
    load_dotenv(os.path.join(os.path.dirname(__file__), '..', '.env'))


@pytest.fixture(scope="session")
def last_problem():
    """The bundled last-element problem."""
    return load_bundled("last")


@pytest.fixture(scope="session")
def ooo_problem():
    """The bundled odd-one-out problem."""
    return load_bundled("ooo")


@pytest.fixture
def budget():
    return EvalBudget()


@pytest.fixture
def registry():
    return default_registry()


@pytest.fixture
def output_dir(tmp_path):
    """Provide a scratch directory for files written by a test."""
    return tmp_path
