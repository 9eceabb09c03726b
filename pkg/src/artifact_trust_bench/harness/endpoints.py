"""Chat-completion endpoints and the retry/backoff loop around them."""

import asyncio
import logging
import os
from abc import ABC, abstractmethod
from typing import TYPE_CHECKING, Any, Awaitable, Callable, Dict, Mapping, Optional, Tuple

import httpx
from pydantic import BaseModel, ConfigDict

from ..config import AuditorPolicy, EndpointProfile
from ..errors import ConfigError, PermanentRefusal, TransientEndpointError
from ..types import Variant

if TYPE_CHECKING:
    from ..perturb.models import PerturbationRecord

logger = logging.getLogger(__name__)

Sleep = Callable[[float], Awaitable[None]]

_TRANSIENT_STATUS = frozenset({408, 409, 425, 429})
_REFUSAL_STATUS = frozenset({400, 401, 403, 404, 413, 422})


class ChatRequest(BaseModel):
    """One chat-completion call.

    ``request_id`` identifies the matrix cell for logging and for the offline
    auditor; it is never sent over HTTP.
    """

    model_config = ConfigDict(frozen=True)

    model_id: str
    system: str
    user: str
    temperature: float = 0.0
    max_tokens: int = 4096
    request_id: str = ""


class ChatEndpoint(ABC):
    """Anything that turns a ChatRequest into raw completion text."""

    def __init__(self, profile: EndpointProfile):
        self.profile = profile

    @property
    def model_id(self) -> str:
        return self.profile.model_id

    @abstractmethod
    async def complete(self, request: ChatRequest) -> str:
        """Return the raw completion text or raise an EndpointError."""

    async def aclose(self) -> None:
        return None


class HttpChatEndpoint(ChatEndpoint):
    """OpenAI-compatible ``/chat/completions`` over httpx."""

    def __init__(self, profile: EndpointProfile, client: Optional[httpx.AsyncClient] = None):
        super().__init__(profile)
        self._client = client or httpx.AsyncClient(timeout=profile.timeout)
        self._owns_client = client is None

    def _headers(self) -> Dict[str, str]:
        headers = {"Content-Type": "application/json"}
        env = self.profile.api_key_env
        if env:
            key = os.environ.get(env)
            if not key:
                raise PermanentRefusal(f"environment variable {env} is not set", {"env": env})
            headers["Authorization"] = f"Bearer {key}"
        return headers

    async def complete(self, request: ChatRequest) -> str:
        payload = {
            "model": request.model_id,
            "messages": [
                {"role": "system", "content": request.system},
                {"role": "user", "content": request.user},
            ],
            "temperature": request.temperature,
            "max_tokens": request.max_tokens,
        }
        url = f"{self.profile.locator.rstrip('/')}/chat/completions"
        try:
            response = await self._client.post(url, json=payload, headers=self._headers())
        except httpx.TimeoutException as e:
            raise TransientEndpointError(f"timeout calling {url}: {e}") from e
        except httpx.TransportError as e:
            raise TransientEndpointError(f"transport error calling {url}: {e}") from e

        status = response.status_code
        if status in _TRANSIENT_STATUS or status >= 500:
            raise TransientEndpointError(
                f"HTTP {status}: {response.text[:200]}", {"status": status}
            )
        if status in _REFUSAL_STATUS or status >= 400:
            raise PermanentRefusal(f"HTTP {status}: {response.text[:200]}", {"status": status})
        return _completion_text(response.json())

    async def aclose(self) -> None:
        if self._owns_client:
            await self._client.aclose()


def _completion_text(body: Mapping[str, Any]) -> str:
    try:
        choice = body["choices"][0]
    except (KeyError, IndexError, TypeError):
        raise TransientEndpointError("response carries no choices") from None
    if choice.get("finish_reason") == "content_filter":
        raise PermanentRefusal("completion withheld by content filter")
    content = (choice.get("message") or {}).get("content")
    if not isinstance(content, str):
        raise TransientEndpointError("response carries no message content")
    return content


async def complete_with_retry(
    endpoint: ChatEndpoint,
    request: ChatRequest,
    sleep: Sleep = asyncio.sleep,
) -> str:
    """Call ``endpoint``, retrying transient failures on the profile's backoff schedule.

    PermanentRefusal is raised immediately; the last TransientEndpointError is
    raised once the retry limit is spent.
    """
    profile = endpoint.profile
    attempt = 0
    while True:
        try:
            return await endpoint.complete(request)
        except TransientEndpointError as e:
            if attempt >= profile.retry_limit:
                raise
            delay = profile.backoff_delay(attempt)
            logger.warning(
                f"{request.request_id or profile.model_id}: {e.message}; "
                f"retry {attempt + 1}/{profile.retry_limit} in {delay:.1f}s"
            )
            await sleep(delay)
            attempt += 1


def open_endpoint(
    profile: EndpointProfile,
    provenance: Optional[Mapping[Tuple[Variant, str], "PerturbationRecord"]] = None,
    policy: Optional[AuditorPolicy] = None,
) -> ChatEndpoint:
    """Build the endpoint named by ``profile.locator``.

    ``auditor://`` locators get the offline reference auditor, which looks up
    provenance by (variant, sample id) in ``provenance``.
    """
    if profile.locator.startswith("auditor://"):
        from ..auditor import AuditorEndpoint

        return AuditorEndpoint(profile, provenance or {}, policy or AuditorPolicy())
    if profile.locator.startswith(("http://", "https://")):
        return HttpChatEndpoint(profile)
    raise ConfigError(
        f"unsupported endpoint locator: {profile.locator}", {"model_id": profile.model_id}
    )
