"""Mock and HTTP mutation operators."""

from __future__ import annotations

import json

import httpx
import pytest

from archipelago.operators import (
    HttpChatOperator,
    MockScriptOperator,
    OperatorError,
    mutate,
)


class TestMockScriptOperator:
    def test_tag_lookup(self):
        op = MockScriptOperator({"iter:1": "one", "tactic:1": "t-one"})
        assert op.generate("s", "u", tag="iter:1") == "one"
        assert op.generate("s", "u", tag="tactic:1") == "t-one"

    def test_bare_integer_alias(self):
        op = MockScriptOperator({"3": "three"})
        assert op.generate("s", "u", tag="iter:3") == "three"

    def test_default_fallback(self):
        op = MockScriptOperator({}, default="fallback")
        assert op.generate("s", "u", tag="iter:9") == "fallback"

    def test_missing_tag_fails(self):
        op = MockScriptOperator({"iter:1": "one"})
        with pytest.raises(OperatorError):
            op.generate("s", "u", tag="iter:2")

    def test_from_file_flat_and_wrapped(self, tmp_path):
        flat = tmp_path / "flat.json"
        flat.write_text(json.dumps({"iter:1": "a"}))
        assert MockScriptOperator.from_file(flat).generate("s", "u", tag="iter:1") == "a"

        wrapped = tmp_path / "wrapped.json"
        wrapped.write_text(json.dumps({"responses": {"iter:1": "b"}, "default": "d"}))
        op = MockScriptOperator.from_file(wrapped)
        assert op.generate("s", "u", tag="iter:1") == "b"
        assert op.generate("s", "u", tag="iter:7") == "d"


class TestMutate:
    def test_extracts_code_block(self):
        op = MockScriptOperator({"iter:1": "sure!\n```\nx = 2\n```"})
        assert mutate(op, ("sys", "user"), tag="iter:1") == "x = 2"

    def test_scripted_tweak_passthrough(self):
        op = MockScriptOperator({"iter:1": "```\nparent + 1 tweak\n```"})
        assert mutate(op, ("sys", "user"), tag="iter:1") == "parent + 1 tweak"

    def test_no_code_block_is_failure(self):
        op = MockScriptOperator({"iter:1": "I refuse to write code."})
        with pytest.raises(OperatorError):
            mutate(op, ("sys", "user"), tag="iter:1")


def chat_response(content: str) -> dict:
    return {"choices": [{"message": {"role": "assistant", "content": content}}]}


def http_operator(handler) -> HttpChatOperator:
    transport = httpx.MockTransport(handler)
    return HttpChatOperator(
        model="test-model",
        api_base="https://llm.invalid/v1",
        api_key="test-key",
        backoff_base=0.0,
        client=httpx.Client(transport=transport),
    )


class TestHttpChatOperator:
    def test_success_round_trip(self):
        captured = {}

        def handler(request: httpx.Request) -> httpx.Response:
            captured["url"] = str(request.url)
            captured["body"] = json.loads(request.content)
            captured["auth"] = request.headers.get("authorization")
            return httpx.Response(200, json=chat_response("```\nx = 1\n```"))

        op = http_operator(handler)
        out = op.generate("system msg", "user msg", tag="iter:1")
        assert out == "```\nx = 1\n```"
        assert captured["url"] == "https://llm.invalid/v1/chat/completions"
        assert captured["body"]["model"] == "test-model"
        assert captured["body"]["messages"][0] == {"role": "system", "content": "system msg"}
        assert captured["body"]["messages"][1] == {"role": "user", "content": "user msg"}
        assert captured["auth"] == "Bearer test-key"

    def test_retries_transient_errors_then_succeeds(self):
        calls = {"n": 0}

        def handler(request: httpx.Request) -> httpx.Response:
            calls["n"] += 1
            if calls["n"] < 3:
                return httpx.Response(500, text="boom")
            return httpx.Response(200, json=chat_response("ok"))

        assert http_operator(handler).generate("s", "u", tag="iter:1") == "ok"
        assert calls["n"] == 3

    def test_rate_limit_is_retried(self):
        calls = {"n": 0}

        def handler(request: httpx.Request) -> httpx.Response:
            calls["n"] += 1
            if calls["n"] == 1:
                return httpx.Response(429, text="slow down")
            return httpx.Response(200, json=chat_response("ok"))

        assert http_operator(handler).generate("s", "u", tag="iter:1") == "ok"

    def test_bounded_attempts_then_error(self):
        calls = {"n": 0}

        def handler(request: httpx.Request) -> httpx.Response:
            calls["n"] += 1
            return httpx.Response(503, text="down")

        with pytest.raises(OperatorError):
            http_operator(handler).generate("s", "u", tag="iter:1")
        assert calls["n"] == 3

    def test_malformed_payload_is_retried(self):
        calls = {"n": 0}

        def handler(request: httpx.Request) -> httpx.Response:
            calls["n"] += 1
            if calls["n"] == 1:
                return httpx.Response(200, json={"unexpected": True})
            return httpx.Response(200, json=chat_response("fine"))

        assert http_operator(handler).generate("s", "u", tag="iter:1") == "fine"

    def test_temperature_and_seed_passthrough(self):
        captured = {}

        def handler(request: httpx.Request) -> httpx.Response:
            captured.update(json.loads(request.content))
            return httpx.Response(200, json=chat_response("ok"))

        transport = httpx.MockTransport(handler)
        op = HttpChatOperator(
            model="m",
            api_base="https://llm.invalid/v1",
            temperature=0.2,
            seed=7,
            client=httpx.Client(transport=transport),
        )
        op.generate("s", "u", tag="iter:1")
        assert captured["temperature"] == 0.2
        assert captured["seed"] == 7
