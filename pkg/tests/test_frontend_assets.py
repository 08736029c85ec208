"""Agent serving the real frontend build (skips when dist/ is absent)."""
from pathlib import Path

import pytest
from fastapi.testclient import TestClient

from mgcore.agent import create_agent_app
from mgcore.keystore import Keystore

DIST = Path(__file__).resolve().parent.parent / "frontend" / "dist"

pytestmark = pytest.mark.skipif(
    not (DIST / "frontend.js").exists(),
    reason="frontend not built (cd frontend && npm run build)",
)

ORIGIN = "http://127.0.0.1:8747"


@pytest.fixture
def http(tmp_path):
    Keystore.init(tmp_path / "ks", "pw", iterations=100)
    app = create_agent_app(tmp_path / "ks", assets_dir=DIST, origin=ORIGIN)
    with TestClient(app) as client:
        yield client


def test_all_four_asset_routes_serve_build_outputs(http):
    for route, kind in [
        ("/overlay/read.html", "text/html"),
        ("/overlay/compose.html", "text/html"),
        ("/frontend.js", "application/javascript"),
        ("/bookmarklet.js", "application/javascript"),
    ]:
        response = http.get(route)
        assert response.status_code == 200, route
        assert response.headers["content-type"].startswith(kind)
        assert len(response.text) > 100


def test_origin_baked_into_scripts(http):
    for route in ("/frontend.js", "/bookmarklet.js"):
        body = http.get(route).text
        assert "__AGENT_ORIGIN__" not in body
        assert ORIGIN in body


def test_overlay_pages_are_self_contained(http):
    # the agent exposes exactly four asset routes, so the pages must not
    # pull in any further same-origin files
    for route in ("/overlay/read.html", "/overlay/compose.html"):
        body = http.get(route).text
        assert "<script>" in body  # inlined bundle
        assert 'src="' not in body
        assert "<link" not in body
