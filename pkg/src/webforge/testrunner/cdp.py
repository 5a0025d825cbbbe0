"""Browser driver speaking the Chrome DevTools Protocol over a websocket.

Attaches to an already-running headless browser started with
``--remote-debugging-port``. Implements the same interface as the HTTP probe
driver; used when the run configuration selects the ``cdp`` driver.
"""

from __future__ import annotations

import base64
import json
import time
from urllib.parse import urlsplit

import requests
from websockets.sync.client import connect

from webforge.errors import DriverError, ElementNotFoundError, NavigationError

_CLICK_JS = """
(function(target) {
  var el = null;
  try { el = document.querySelector(target); } catch (e) {}
  if (!el) {
    var links = document.querySelectorAll('a, button');
    for (var i = 0; i < links.length; i++) {
      if (links[i].innerText.trim().toLowerCase() === target.trim().toLowerCase()) {
        el = links[i];
        break;
      }
    }
  }
  if (!el) return false;
  el.click();
  return true;
})(%s)
"""

_TYPE_JS = """
(function(target, value) {
  var el = null;
  try { el = document.querySelector(target); } catch (e) {}
  if (!el) return false;
  el.focus();
  el.value = value;
  el.dispatchEvent(new Event('input', {bubbles: true}));
  el.dispatchEvent(new Event('change', {bubbles: true}));
  return true;
})(%s, %s)
"""


class CdpBrowserDriver:
    def __init__(
        self,
        base_url: str,
        debugger_host: str = "127.0.0.1",
        debugger_port: int = 9222,
        timeout_s: float = 15.0,
    ):
        self.base_url = base_url.rstrip("/")
        self.timeout_s = timeout_s
        self._message_id = 0
        try:
            targets = requests.get(
                f"http://{debugger_host}:{debugger_port}/json/list", timeout=timeout_s
            ).json()
        except (requests.RequestException, ValueError) as exc:
            raise DriverError(f"cannot list debugger targets: {exc}") from exc
        pages = [t for t in targets if t.get("type") == "page"]
        if not pages:
            raise DriverError("no page target exposed by the browser")
        ws_url = pages[0]["webSocketDebuggerUrl"]
        self._socket = connect(ws_url, open_timeout=timeout_s, max_size=64 * 1024 * 1024)
        self._call("Page.enable")
        self._call("Runtime.enable")

    # -- protocol plumbing --------------------------------------------------

    def _call(self, method: str, params: dict | None = None) -> dict:
        self._message_id += 1
        message_id = self._message_id
        self._socket.send(
            json.dumps({"id": message_id, "method": method, "params": params or {}})
        )
        deadline = time.monotonic() + self.timeout_s
        while time.monotonic() < deadline:
            raw = self._socket.recv(timeout=max(deadline - time.monotonic(), 0.01))
            message = json.loads(raw)
            if message.get("id") == message_id:
                if "error" in message:
                    raise DriverError(f"{method} failed: {message['error']}")
                return message.get("result", {})
            # Events and replies to other ids are not interesting here.
        raise DriverError(f"timeout waiting for reply to {method}")

    def _evaluate(self, expression: str):
        result = self._call(
            "Runtime.evaluate",
            {"expression": expression, "returnByValue": True},
        )
        if "exceptionDetails" in result:
            raise DriverError(f"evaluate failed: {result['exceptionDetails']}")
        return result.get("result", {}).get("value")

    # -- BrowserDriver interface ---------------------------------------------

    def navigate(self, target: str) -> None:
        url = target if target.startswith("http") else self.base_url + (
            target if target.startswith("/") else "/" + target
        )
        result = self._call("Page.navigate", {"url": url})
        if result.get("errorText"):
            raise NavigationError(f"navigation to {url} failed: {result['errorText']}")
        deadline = time.monotonic() + self.timeout_s
        while time.monotonic() < deadline:
            if self._evaluate("document.readyState") == "complete":
                return
            time.sleep(0.05)
        raise NavigationError(f"page at {url} never finished loading")

    def location(self) -> str:
        href = self._evaluate("window.location.href") or "/"
        parts = urlsplit(href)
        return (parts.path or "/") + (f"?{parts.query}" if parts.query else "")

    def page_text(self) -> str:
        return self._evaluate("document.body ? document.body.innerText : ''") or ""

    def screenshot(self) -> bytes:
        result = self._call("Page.captureScreenshot", {"format": "png"})
        return base64.b64decode(result["data"])

    def click(self, target: str) -> None:
        if not self._evaluate(_CLICK_JS % json.dumps(target)):
            raise ElementNotFoundError(f"no element matching {target!r}")

    def type_text(self, target: str, text: str) -> None:
        if not self._evaluate(_TYPE_JS % (json.dumps(target), json.dumps(text))):
            raise ElementNotFoundError(f"no input matching {target!r}")

    def wait(self, seconds: float) -> None:
        time.sleep(max(seconds, 0.0))

    def close(self) -> None:
        try:
            self._socket.close()
        except Exception:
            pass
