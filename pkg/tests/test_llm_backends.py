import json
import threading
from http.server import BaseHTTPRequestHandler, HTTPServer

import pytest
import requests

from solcot.llm import (
    BackendConfig,
    ExchangeLog,
    LlmClient,
    MalformedBackendResponse,
    ScriptExhausted,
    Timeout,
    TransportError,
    extract_numeric_prediction,
    generate,
    mock_response,
    resolve_base_url,
)


class FakeOllama:
    """A local HTTP server answering /api/generate from a queue of (status, body) replies."""

    def __init__(self, replies):
        self.replies = list(replies)
        self.requests: list[dict] = []
        owner = self

        class Handler(BaseHTTPRequestHandler):
            def do_POST(self):
                length = int(self.headers["Content-Length"])
                owner.requests.append({"path": self.path, "body": json.loads(self.rfile.read(length))})
                status, body = owner.replies.pop(0) if owner.replies else (200, {"response": "PREDICTION: 0"})
                payload = body.encode() if isinstance(body, str) else json.dumps(body).encode()
                self.send_response(status)
                self.send_header("Content-Type", "application/json")
                self.send_header("Content-Length", str(len(payload)))
                self.end_headers()
                self.wfile.write(payload)

            def log_message(self, *args):
                pass

        self.server = HTTPServer(("127.0.0.1", 0), Handler)
        self.url = f"http://127.0.0.1:{self.server.server_port}"
        self.thread = threading.Thread(target=self.server.serve_forever, daemon=True)

    def __enter__(self):
        self.thread.start()
        return self

    def __exit__(self, *exc):
        self.server.shutdown()
        self.server.server_close()


def ollama(url, **kw):
    return BackendConfig(kind="ollama", base_url=url, model_name="deepseek-r1:14b", timeout=5.0, **kw)


def test_wire_protocol():
    with FakeOllama([(200, {"response": "PREDICTION: -3.1", "done": True})]) as srv:
        ex = generate(ollama(srv.url, temperature=0.2, seed=7), "predict benzene")
    assert ex.response == "PREDICTION: -3.1"
    [req] = srv.requests
    assert req["path"] == "/api/generate"
    assert req["body"] == {
        "model": "deepseek-r1:14b",
        "prompt": "predict benzene",
        "stream": False,
        "options": {"temperature": 0.2, "seed": 7},
    }
    assert ex.backend["model_name"] == "deepseek-r1:14b" and ex.latency >= 0


def test_server_errors_are_retried_with_backoff():
    sleeps = []
    with FakeOllama([(503, "busy"), (500, "oops"), (200, {"response": "ok"})]) as srv:
        client = LlmClient(ollama(srv.url, max_retries=3, backoff=0.5), sleep=sleeps.append)
        assert client.generate("p").response == "ok"
    assert len(srv.requests) == 3 and sleeps == [0.5, 1.0]


def test_retries_exhausted_raise_transport_error():
    with FakeOllama([(503, "busy")] * 5) as srv:
        client = LlmClient(ollama(srv.url, max_retries=2), sleep=lambda s: None)
        with pytest.raises(TransportError, match="503"):
            client.generate("p")
    assert len(srv.requests) == 3


@pytest.mark.parametrize(
    "status, body, match",
    [(404, "model not found", "404"), (200, "not json", "non-JSON"), (200, {"done": True}, "response")],
)
def test_malformed_responses(status, body, match):
    with FakeOllama([(status, body)]) as srv:
        with pytest.raises(MalformedBackendResponse, match=match):
            generate(ollama(srv.url), "p")
    assert len(srv.requests) == 1  # not retried


def test_unreachable_url_raises_transport_error_after_retries():
    sleeps = []
    # port 9 (discard) on loopback is closed in the sandbox, so connections are refused
    client = LlmClient(ollama("http://127.0.0.1:9", max_retries=2), sleep=sleeps.append)
    with pytest.raises(TransportError) as info:
        client.generate("p")
    assert len(sleeps) == 2 and not isinstance(info.value, Timeout)


def test_timeout_is_classified():
    class SlowSession:
        def post(self, *a, **kw):
            raise requests.Timeout("slow")

    client = LlmClient(ollama("http://x", max_retries=1), session=SlowSession(), sleep=lambda s: None)
    with pytest.raises(Timeout):
        client.generate("p")


def test_mock_is_a_pure_function_of_prompt_and_seed():
    cfg = BackendConfig(kind="mock", seed=3)
    a, b = generate(cfg, "p").response, generate(cfg, "p").response
    assert a == b == mock_response("p", 3)
    assert len({mock_response("p", seed) for seed in range(10)}) > 1


def test_mock_anchors_on_surrogate_estimate():
    value = extract_numeric_prediction(mock_response("GP mean: -4.00, GP std: 0.50\nPREDICTION: <number>", 0))
    assert -5.5 <= value <= -2.5


def test_scripted_replay_and_exhaustion():
    client = LlmClient(BackendConfig(kind="scripted"), script=["one", "two"])
    assert [client.generate("a").response, client.generate("b").response] == ["one", "two"]
    with pytest.raises(ScriptExhausted):
        client.generate("c")


def test_scripted_callable():
    client = LlmClient(BackendConfig(kind="scripted"), script=lambda prompt: prompt.upper())
    assert client.generate("abc").response == "ABC" and client.calls == 1


def test_empty_prompt_rejected():
    with pytest.raises(ValueError):
        generate(BackendConfig(), "")


@pytest.mark.parametrize("kw", [{"timeout": 0}, {"temperature": -0.1}, {"kind": "openai"}, {"max_retries": -1}])
def test_config_validation(kw):
    with pytest.raises(ValueError):
        BackendConfig(**kw)


def test_base_url_resolution(monkeypatch):
    monkeypatch.delenv("SOLCOT_BACKEND_URL", raising=False)
    monkeypatch.delenv("OLLAMA_HOST", raising=False)
    assert resolve_base_url() == "http://localhost:11434"
    monkeypatch.setenv("OLLAMA_HOST", "gpu-box:11434")
    assert resolve_base_url() == "http://gpu-box:11434"
    monkeypatch.setenv("SOLCOT_BACKEND_URL", "https://llm.example/")
    assert resolve_base_url() == "https://llm.example"
    assert resolve_base_url("http://explicit:1") == "http://explicit:1"


def test_exchange_log_is_verbatim(tmp_path):
    log = ExchangeLog(tmp_path / "ex.jsonl")
    long_text = "Ünïcødé reasoning\n" * 5000 + "PREDICTION: -1"
    client = LlmClient(BackendConfig(kind="scripted"), script=[long_text, "x"], exchange_log=log, role="predictor")
    client.generate("first")
    client.with_role("analyzer").generate("second")
    rows = log.read()
    assert [r.response for r in rows] == [long_text, "x"]
    assert [r.role for r in rows] == ["predictor", "analyzer"]
    assert len((tmp_path / "ex.jsonl").read_text(encoding="utf-8").splitlines()) == 2
