"""LLM clients and the caption-rewriting prompt.

The HTTP client posts ``{"prompt": ...}`` to the configured endpoint with
an optional bearer token from PIONER_LLM_TOKEN and expects
``{"completion": ...}`` back. The recorded client replays canned outputs
for offline runs and tests.
"""
from __future__ import annotations

import os
import re
import time
from typing import Callable, Dict, Optional, Protocol

import httpx

from ..errors import LLMError

TOKEN_ENV = "PIONER_LLM_TOKEN"

INVALID_MARKER = "<INVALID>"

REWRITE_PROMPT = """I have image descriptions derived from spoken narratives. These need to be rewritten as concise, stand-alone captions in the style of the image-caption datasets. Follow these rules:

- Remove unnecessary narrative phrases like "we can see," "there is," "in this image," etc.
- Ensure the caption is standalone and descriptive.
- Use simple, objective language that highlights key elements.
- Keep it concise—just a single phrase.
- Follow the classical style of caption datasets.
- If the description is vague, subjective, or does not describe a concrete visual element (e.g., "The image is taken indoor," "This image is blurred"), return `<INVALID>`.
- Wrap the output in `{}` and add nothing else.

### **Examples:**
- **Input:** "We can see a young elephant stands which is near the water in a wooded area."
  **Output:** {A young elephant stands near the water in a wooded area.}

- **Input:** "In this image I can see some young children kicking a soccer ball in a field."
  **Output:** {A group of young children kicking a soccer ball around a field.}

- **Input:** "In the left of the image, we see a pole that has two green street signs on it."
  **Output:** {A pole has two green street signs on it.}

- **Input:** "We can see two surfboards which are stuck in the sand along the seashore."
  **Output:** {Two surfboards stuck in the sand along the seashore.}

- **Input:** "This image consists of a man which rides a wakeboard behind a boat."
  **Output:** {A man rides a wakeboard behind a boat.}

- **Input:** "In the background, there are a bunch of sticky notes and a pair of scissors."
  **Output:** {A bunch of sticky notes and a pair of scissors.}

- **Input:** "It looks like a sepia-toned photograph of a motorcycle underneath the shadow of a
tree."
  **Output:** {A sepia-toned photograph of a motorcycle underneath the shadow of a tree.}

- **Input:** "There is a sky"
  **Output:** {A sky.}

- **Input:** "She is smiling."
  **Output:** {A smiling girl.}

- **Input:** "The image is taken indoor."
  **Output:** {<INVALID>}

- **Input:** "This image is edited."
  **Output:** {<INVALID>}

- **Input:** "The image is blurred."
  **Output:** {<INVALID>}

- **Input:** "I think he is about to jump."
  **Output:** {<INVALID>}

Now, rewrite the following captions accordingly. Wrap each in `{}` and add nothing else:
<INPUT CAPTION>
"""

_BRACED = re.compile(r"\{(.*?)\}", re.DOTALL)


def build_prompt(sentence: str) -> str:
    return REWRITE_PROMPT.replace("<INPUT CAPTION>", sentence)


def parse_rewrite(raw: str) -> Optional[str]:
    """First braced span of the LLM output; None means the sentence is invalid.

    Raises LLMError when no braced span (or an empty one) is present.
    """
    match = _BRACED.search(raw)
    if match is None:
        raise LLMError(f"no braced span in LLM output: {raw[:200]!r}")
    inner = match.group(1).strip()
    if inner == INVALID_MARKER:
        return None
    if not inner:
        raise LLMError("LLM returned an empty caption")
    return inner


class LLMClient(Protocol):
    def complete(self, prompt: str) -> str:
        """Return the raw completion text for a prompt."""


class HTTPLLMClient:
    def __init__(self, url: str, timeout: float = 30.0, token: Optional[str] = None):
        self.url = url
        self.timeout = timeout
        self._token = token if token is not None else os.environ.get(TOKEN_ENV)

    def complete(self, prompt: str) -> str:
        headers = {}
        if self._token:
            headers["Authorization"] = f"Bearer {self._token}"
        try:
            resp = httpx.post(
                self.url, json={"prompt": prompt}, headers=headers, timeout=self.timeout
            )
            resp.raise_for_status()
            body = resp.json()
        except httpx.HTTPError as e:
            raise LLMError(f"LLM endpoint failed: {e}") from e
        except ValueError as e:
            raise LLMError(f"LLM endpoint returned non-JSON: {e}") from e
        if "completion" not in body:
            raise LLMError("LLM response is missing 'completion'")
        return str(body["completion"])


class RecordedLLMClient:
    """Replays recorded sentence -> raw-output fixtures; offline test mode."""

    def __init__(self, fixtures: Dict[str, str], default: Optional[str] = None):
        self.fixtures = dict(fixtures)
        self.default = default
        self.calls = 0

    def complete(self, prompt: str) -> str:
        self.calls += 1
        for sentence, output in self.fixtures.items():
            if sentence in prompt:
                return output
        if self.default is not None:
            return self.default
        raise LLMError("no recorded fixture matches the prompt")


class TokenBucket:
    """Blocking token bucket; rate is tokens per second, burst is capacity."""

    def __init__(self, rate: float, burst: int = 1, clock: Callable[[], float] = time.monotonic):
        if rate <= 0 or burst < 1:
            raise ValueError("rate must be positive and burst >= 1")
        self.rate = rate
        self.burst = burst
        self._clock = clock
        self._tokens = float(burst)
        self._stamp = clock()

    def acquire(self) -> float:
        """Take one token, sleeping if needed; returns seconds waited."""
        waited = 0.0
        while True:
            now = self._clock()
            self._tokens = min(self.burst, self._tokens + (now - self._stamp) * self.rate)
            self._stamp = now
            if self._tokens >= 1.0:
                self._tokens -= 1.0
                return waited
            need = (1.0 - self._tokens) / self.rate
            waited += need
            time.sleep(need)
