import json

import pytest
import requests

from rdolt.backend import (
    CompletionRequest,
    HttpBackend,
    load_script,
    resolve_backend,
    scripted_replay,
)
from rdolt.errors import (
    BadStatusError,
    EmptyResponseError,
    ExhaustedError,
    TransportError,
)


def req(text="hello") -> CompletionRequest:
    return CompletionRequest(user_text=text, temperature=0.4, max_tokens=64,
                             model="test-model")


class FakeSession:
    """Stands in for requests.Session; pops scripted (status, body) outcomes."""

    def __init__(self, outcomes):
        self.outcomes = list(outcomes)
        self.posts = []

    def post(self, url, json=None, headers=None, timeout=None):
        self.posts.append({"url": url, "json": json, "headers": headers})
        outcome = self.outcomes.pop(0)
        if isinstance(outcome, Exception):
            raise outcome
        status, body = outcome
        return FakeResponse(status, body)


class FakeResponse:
    def __init__(self, status_code, body):
        self.status_code = status_code
        self._body = body
        self.text = json.dumps(body)

    def json(self):
        return self._body


def ok_body(text="fine"):
    return {"choices": [{"message": {"content": text}}]}


class TestScriptedBackend:
    def test_replays_in_order(self):
        backend = scripted_replay(["A", "B"])
        assert backend.complete(req()) == "A"
        assert backend.complete(req()) == "B"

    def test_strict_exhaustion(self):
        backend = scripted_replay(["x"])
        assert backend.complete(req()) == "x"
        with pytest.raises(ExhaustedError):
            backend.complete(req())

    def test_lenient_mode_repeats_last(self):
        backend = scripted_replay(["x", "y"], strict=False)
        assert [backend.complete(req()) for _ in range(4)] == ["x", "y", "y", "y"]

    def test_empty_script_rejected(self):
        with pytest.raises(ValueError):
            scripted_replay([])

    def test_determinism(self):
        script = ["one", "two", "three"]
        a = [scripted_replay(script).complete(req()) for _ in range(1)]
        runs = []
        for _ in range(2):
            backend = scripted_replay(script)
            runs.append([backend.complete(req()) for _ in range(3)])
        assert runs[0] == runs[1] == script
        assert a == ["one"]


class TestHttpBackend:
    def test_success_and_wire_shape(self):
        session = FakeSession([(200, ok_body("answer"))])
        backend = HttpBackend("http://x:1234", api_key="k", session=session,
                              sleep=lambda s: None)
        assert backend.complete(req("ping")) == "answer"
        post = session.posts[0]
        assert post["url"] == "http://x:1234/v1/chat/completions"
        assert post["json"]["model"] == "test-model"
        assert post["json"]["messages"] == [{"role": "user", "content": "ping"}]
        assert post["json"]["temperature"] == 0.4
        assert post["json"]["max_tokens"] == 64
        assert post["headers"]["Authorization"] == "Bearer k"

    def test_transport_error_after_retries(self):
        sleeps = []
        session = FakeSession([requests.ConnectionError("down")] * 4)
        backend = HttpBackend("http://x", session=session, sleep=sleeps.append)
        with pytest.raises(TransportError):
            backend.complete(req())
        assert len(session.posts) == 4  # initial try plus 3 retries
        assert sleeps == [0.25, 0.5, 1.0]

    def test_transient_status_retried_then_recovers(self):
        session = FakeSession([(500, {}), (200, ok_body("ok"))])
        backend = HttpBackend("http://x", session=session, sleep=lambda s: None)
        assert backend.complete(req()) == "ok"

    def test_client_error_not_retried(self):
        session = FakeSession([(404, {"detail": "nope"})])
        backend = HttpBackend("http://x", session=session, sleep=lambda s: None)
        with pytest.raises(BadStatusError) as err:
            backend.complete(req())
        assert err.value.status == 404
        assert len(session.posts) == 1

    def test_empty_response_is_never_success(self):
        session = FakeSession([(200, {"choices": [{"message": {"content": "  "}}]})])
        backend = HttpBackend("http://x", session=session, sleep=lambda s: None)
        with pytest.raises(EmptyResponseError):
            backend.complete(req())

    def test_system_text_included(self):
        session = FakeSession([(200, ok_body())])
        backend = HttpBackend("http://x", session=session, sleep=lambda s: None)
        backend.complete(CompletionRequest(user_text="u", system_text="s"))
        assert session.posts[0]["json"]["messages"][0] == {"role": "system", "content": "s"}


class TestScriptLoading:
    def test_bare_list(self, tmp_path):
        path = tmp_path / "s.json"
        path.write_text(json.dumps(["a", "b"]))
        assert load_script(path) == ["a", "b"]

    def test_responses_key(self, tmp_path):
        path = tmp_path / "s.json"
        path.write_text(json.dumps({"responses": ["a"], "task": {}}))
        assert load_script(path) == ["a"]

    def test_resolve_scripted(self, tmp_path):
        path = tmp_path / "s.json"
        path.write_text(json.dumps(["only"]))
        backend = resolve_backend(f"scripted:{path}")
        assert backend.complete(req()) == "only"

    def test_resolve_url(self):
        backend = resolve_backend("http://somewhere:8000")
        assert isinstance(backend, HttpBackend)
