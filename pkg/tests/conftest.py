from __future__ import annotations

import sys
from pathlib import Path

import pytest

PROJECT_ROOT = Path(__file__).resolve().parents[1]
SRC_PATH = PROJECT_ROOT / "src"
TESTS_PATH = PROJECT_ROOT / "tests"

if str(SRC_PATH) not in sys.path:
    sys.path.insert(0, str(SRC_PATH))
if str(TESTS_PATH) not in sys.path:
    sys.path.insert(0, str(TESTS_PATH))


@pytest.fixture
def anyio_backend() -> str:
    return "asyncio"


@pytest.fixture(autouse=True)
def _no_real_credentials(monkeypatch):
    for name in ("VAXKIT_LLM_API_KEY", "VAXKIT_LLM_BASE_URL", "VAXKIT_LLM_MODEL", "VAXKIT_CACHE_DIR", "VAXKIT_DELIMITER"):
        monkeypatch.delenv(name, raising=False)
