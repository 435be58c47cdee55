import pytest


@pytest.fixture(autouse=True)
def isolated_cache(tmp_path, monkeypatch):
    """Keep every test away from the user's real polynomial cache."""
    monkeypatch.setenv("JOUANOLOU_CACHE_DIR", str(tmp_path / "cache"))
    return tmp_path / "cache"
