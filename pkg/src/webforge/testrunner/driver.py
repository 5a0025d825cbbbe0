"""Browser drivers: the interface plus the plain-HTTP probe implementation.

The probe driver fetches pages over HTTP and exposes a text view of the DOM.
It cannot execute scripts; it exists for fixture templates, deterministic
replays, and tests. Production runs against a real browser use the remote
debugging driver in :mod:`webforge.testrunner.cdp`, which implements the same
interface.
"""

from __future__ import annotations

import html
import re
import time
from typing import Protocol

import requests

from webforge.errors import ElementNotFoundError, NavigationError
from webforge.testrunner.raster import render_text_screenshot

MAX_WAIT_S = 5.0


class BrowserDriver(Protocol):
    def navigate(self, target: str) -> None: ...

    def location(self) -> str:
        """Current location as a path (origin stripped)."""
        ...

    def page_text(self) -> str: ...

    def screenshot(self) -> bytes: ...

    def click(self, target: str) -> None: ...

    def type_text(self, target: str, text: str) -> None: ...

    def wait(self, seconds: float) -> None: ...

    def close(self) -> None: ...


_TAG_STRIP = re.compile(r"<(script|style)\b.*?</\1\s*>", re.DOTALL | re.IGNORECASE)
_TAGS = re.compile(r"<[^>]+>")
_LINK = re.compile(
    r"<a\b[^>]*?href\s*=\s*\"([^\"]*)\"[^>]*>(.*?)</a>", re.DOTALL | re.IGNORECASE
)


def html_to_text(markup: str) -> str:
    """Visible-text approximation: drop script/style, strip tags, tidy space."""
    text = _TAG_STRIP.sub(" ", markup)
    text = text.replace("</p>", "\n").replace("</div>", "\n").replace("<br>", "\n")
    text = _TAGS.sub(" ", text)
    text = html.unescape(text)
    lines = [re.sub(r"[ \t]+", " ", line).strip() for line in text.split("\n")]
    return "\n".join(line for line in lines if line)


class HttpProbeDriver:
    """Drives an application with plain HTTP requests.

    click() follows links by their visible text or href; typing is recorded
    but has no page effect (static fixtures have no script engine).
    """

    def __init__(self, base_url: str, timeout_s: float = 10.0):
        self.base_url = base_url.rstrip("/")
        self.timeout_s = timeout_s
        self.session = requests.Session()
        self._path = "/"
        self._html = ""
        self.typed: dict[str, str] = {}

    def navigate(self, target: str) -> None:
        path = target if target.startswith("/") else "/" + target
        url = self.base_url + path
        try:
            response = self.session.get(url, timeout=self.timeout_s)
        except requests.RequestException as exc:
            raise NavigationError(f"GET {path} failed: {exc}") from exc
        if response.status_code >= 400:
            raise NavigationError(f"GET {path} returned {response.status_code}")
        self._path = path
        self._html = response.text

    def location(self) -> str:
        return self._path

    def page_text(self) -> str:
        return html_to_text(self._html)

    def screenshot(self) -> bytes:
        return render_text_screenshot(self.page_text())

    def links(self) -> list[tuple[str, str]]:
        return [
            (href, html_to_text(label).strip())
            for href, label in _LINK.findall(self._html)
        ]

    def click(self, target: str) -> None:
        wanted = target.strip().lower()
        for href, label in self.links():
            if label.lower() == wanted or href == target:
                if href.startswith(("http://", "https://", "mailto:")):
                    # Off-origin and mail links terminate in place.
                    return
                self.navigate(href)
                return
        raise ElementNotFoundError(f"no link matching {target!r} on {self._path}")

    def type_text(self, target: str, text: str) -> None:
        self.typed[target] = text

    def wait(self, seconds: float) -> None:
        time.sleep(min(max(seconds, 0.0), MAX_WAIT_S))

    def close(self) -> None:
        self.session.close()
