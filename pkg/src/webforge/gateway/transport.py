"""HTTP transport speaking the common chat-completion wire shape."""

from __future__ import annotations

import base64
import os
import time

import requests

from webforge.errors import ProviderUnreachable
from webforge.gateway.types import ImageAttachment, ModelReply, PromptBundle, ProviderConfig


def _image_part(attachment: ImageAttachment, config: ProviderConfig) -> dict:
    if config.image_encoding != "data-url":
        raise ProviderUnreachable(
            f"unsupported image encoding profile: {config.image_encoding!r}"
        )
    payload = base64.b64encode(attachment.data).decode("ascii")
    return {
        "type": "image_url",
        "image_url": {"url": f"data:image/{attachment.format};base64,{payload}"},
    }


def build_request_body(bundle: PromptBundle, config: ProviderConfig) -> dict:
    messages: list[dict] = []
    if bundle.system:
        messages.append({"role": "system", "content": bundle.system})
    for turn in bundle.turns:
        if isinstance(turn, str):
            messages.append({"role": "user", "content": turn})
        else:
            messages.append({"role": "user", "content": [_image_part(turn, config)]})
    return {
        "model": config.model,
        "temperature": config.temperature,
        "max_tokens": config.max_output_tokens,
        "messages": messages,
    }


def _extract_text(payload: dict) -> str:
    content = payload["choices"][0]["message"]["content"]
    if isinstance(content, list):
        return "".join(
            part.get("text", "") for part in content if isinstance(part, dict)
        )
    return content or ""


class HttpChatTransport:
    """POSTs to a chat-completion endpoint; retries transient failures."""

    def __init__(self, backoff_s: float = 0.5):
        self.backoff_s = backoff_s

    def __call__(self, bundle: PromptBundle, config: ProviderConfig) -> ModelReply:
        if not config.endpoint:
            raise ProviderUnreachable("no provider endpoint configured")
        headers = {"Content-Type": "application/json"}
        api_key = os.environ.get(config.api_key_env, "")
        if api_key:
            headers["Authorization"] = f"Bearer {api_key}"
        body = build_request_body(bundle, config)

        last_error: Exception | None = None
        for attempt in range(config.transport_retries + 1):
            started = time.monotonic()
            try:
                response = requests.post(
                    config.endpoint, json=body, headers=headers, timeout=config.timeout_s
                )
                if response.status_code >= 500:
                    raise requests.HTTPError(f"server error {response.status_code}")
                response.raise_for_status()
                payload = response.json()
                usage = payload.get("usage", {})
                return ModelReply(
                    text=_extract_text(payload),
                    input_tokens=int(usage.get("prompt_tokens", 0)),
                    output_tokens=int(usage.get("completion_tokens", 0)),
                    latency_ms=int((time.monotonic() - started) * 1000),
                )
            except (requests.RequestException, KeyError, ValueError) as exc:
                last_error = exc
                if attempt < config.transport_retries:
                    time.sleep(self.backoff_s * (attempt + 1))
        raise ProviderUnreachable(
            f"provider at {config.endpoint} unreachable: {last_error}"
        ) from last_error
