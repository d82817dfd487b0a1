import pytest


@pytest.fixture(autouse=True, scope="session")
def _isolated_cache(tmp_path_factory):
    # keep transition-matrix cache files out of the real user cache
    import os
    os.environ["DVA_CACHE_DIR"] = str(tmp_path_factory.mktemp("matrix-cache"))
    yield
