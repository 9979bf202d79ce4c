import pytest

from nclayer.spt import build_table


@pytest.fixture(scope="session")
def default_table():
    """Exact table at the standard parameters; built once per session."""
    return build_table(budget=64, layer_count=4, packets_per_layer=8, granularity=4)
