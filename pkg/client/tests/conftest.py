"""Client test fixtures."""

import pytest

from server_process import spawn_server


@pytest.fixture(scope="module")
def server_endpoint():
    with spawn_server() as endpoint:
        yield endpoint
