"""
Pytest configuration and fixtures for nsde-bounds tests.
"""

import json
import os
import shutil
import sys
import tempfile

import numpy as np
import pytest

# Add src to path
sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..', 'src'))

from nsde_bounds.dynamics.families import LinearParams, build_linear_system, build_rnn_system  # noqa: E402

from .factories import random_rnn_params  # noqa: E402


@pytest.fixture
def trivial_system():
    """Factory for f = 0, g = I in dimension d."""
    def make(d: int = 1):
        return build_linear_system(LinearParams(A=np.zeros((d, d)), G=np.eye(d)))
    return make


@pytest.fixture
def ou_params():
    """One-dimensional Ornstein-Uhlenbeck dX = -X dt + dW."""
    return LinearParams(A=-np.eye(1), G=np.eye(1))


@pytest.fixture
def ou_system(ou_params):
    return build_linear_system(ou_params)


@pytest.fixture
def rnn_system():
    """Seeded two-neuron tanh network."""
    return build_rnn_system(random_rnn_params(7, 2))


@pytest.fixture
def temp_dir():
    """Temporary directory removed after the test."""
    path = tempfile.mkdtemp()
    yield path
    shutil.rmtree(path, ignore_errors=True)


@pytest.fixture
def write_config(temp_dir):
    """Write a config dictionary to a JSON file and return its path."""
    def write(data: dict, name: str = "config.json") -> str:
        path = os.path.join(temp_dir, name)
        with open(path, "w") as f:
            json.dump(data, f)
        return path
    return write
