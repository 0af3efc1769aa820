"""HTTP adapter against a loopback stub model server."""

import base64
import io
import json
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

import pytest

from splatforge.assets import AssetStore
from splatforge.backends import (
    AssetRole,
    BackendError,
    BackendUnavailable,
    GenerationRequest,
    HttpBackend,
    ModuleKind,
    http_forward,
)
from splatforge.render import load_image_rgb


def one_pixel_png() -> bytes:
    from PIL import Image

    buf = io.BytesIO()
    Image.new("RGB", (1, 1), (255, 0, 0)).save(buf, format="PNG")
    return buf.getvalue()


class StubHandler(BaseHTTPRequestHandler):
    png = one_pixel_png()
    requests_seen = []

    def do_POST(self):
        length = int(self.headers["Content-Length"])
        body = json.loads(self.rfile.read(length))
        StubHandler.requests_seen.append((self.path, body))
        if self.path.endswith("/image-stylize"):
            payload = {
                "assets": [
                    {
                        "role": "preview_image",
                        "mime": "image/png",
                        "data-base64": base64.b64encode(self.png).decode(),
                    }
                ]
            }
            data = json.dumps(payload).encode()
            self.send_response(200)
            self.send_header("Content-Type", "application/json")
            self.send_header("Content-Length", str(len(data)))
            self.end_headers()
            self.wfile.write(data)
        else:
            self.send_response(500)
            self.end_headers()

    def log_message(self, *args):
        pass


@pytest.fixture(scope="module")
def stub_server():
    server = ThreadingHTTPServer(("127.0.0.1", 0), StubHandler)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    yield f"http://127.0.0.1:{server.server_address[1]}"
    server.shutdown()


def stylize_req():
    from splatforge.render.images import write_pgm16, write_ppm
    import numpy as np

    return GenerationRequest(
        kind=ModuleKind.IMAGE_STYLIZE,
        prompt="realistic",
        seed=3,
        input_image=write_ppm(np.zeros((4, 4, 3), dtype=np.uint8)),
        input_depth=write_pgm16(np.full((4, 4), 0.5), 0.0, 1.0),
    )


def test_stub_round_trip_stores_png(stub_server):
    store = AssetStore()
    backend = HttpBackend(stub_server)
    result = http_forward(backend, stylize_req(), store)
    asset_id = result.asset_for(AssetRole.PREVIEW_IMAGE)
    assert store.media_type(asset_id) == "image/png"
    rgb = load_image_rgb(store, asset_id)  # PNG accepted inbound, decodable
    assert rgb.shape == (1, 1, 3) and tuple(rgb[0, 0]) == (255, 0, 0)

    path, body = StubHandler.requests_seen[-1]
    assert path == "/image-stylize"
    assert body["prompt"] == "realistic" and body["seed"] == 3
    assert set(body["inputs"]) == {"image", "depth"}


def test_500_maps_to_backend_error(stub_server):
    backend = HttpBackend(stub_server)
    req = GenerationRequest(
        kind=ModuleKind.IMAGE_TO_3D,
        prompt="",
        seed=0,
        input_image=b"P6\n1 1\n255\n\x00\x00\x00",
    )
    with pytest.raises(BackendError) as err:
        http_forward(backend, req, store=AssetStore())
    assert err.value.status == 500


def test_unreachable_host_is_unavailable():
    backend = HttpBackend("http://127.0.0.1:1", timeouts={ModuleKind.IMAGE_STYLIZE: 2.0})
    with pytest.raises(BackendUnavailable):
        http_forward(backend, stylize_req(), AssetStore())
