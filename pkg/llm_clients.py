import os
from typing import Optional

import requests
from dotenv import load_dotenv

from tograph_core.utils import render_prompt

load_dotenv()

SYSTEM_PROMPT = "You are a careful assistant that plans and operates multimodal tools for users."


class BaseLLMClient:
    def generate(self, prompt: str, **kwargs) -> str:
        raise NotImplementedError("Implement this method in subclass")


class ChatCompletionClient(BaseLLMClient):
    """
    Any OpenAI-compatible ``/chat/completions`` server. Prompt templates use
    ``{{name}}`` slots, filled from the keyword arguments of ``generate``.
    """

    def __init__(
        self,
        base_url: str,
        api_key: Optional[str] = None,
        model: str = "openai/gpt-4o-mini",
        temperature: float = 0.0,
        max_tokens: int = 1000,
        timeout: float = 60.0,
    ):
        if not base_url:
            raise ValueError("base_url is required for a chat-completion client")
        self.base_url = base_url.rstrip("/")
        self.api_key = api_key
        self.model = model
        self.temperature = temperature
        self.max_tokens = max_tokens
        self.timeout = timeout

    def _headers(self) -> dict:
        headers = {"Content-Type": "application/json"}
        if self.api_key:
            headers["Authorization"] = f"Bearer {self.api_key}"
        return headers

    def generate(self, prompt: str, **kwargs) -> str:
        formatted_prompt = render_prompt(prompt, **kwargs) if kwargs else prompt
        payload = {
            "model": self.model,
            "messages": [
                {"role": "system", "content": SYSTEM_PROMPT},
                {"role": "user", "content": formatted_prompt},
            ],
            "temperature": self.temperature,
            "max_tokens": self.max_tokens,
        }
        response = requests.post(
            f"{self.base_url}/chat/completions",
            headers=self._headers(),
            json=payload,
            timeout=self.timeout,
        )
        response.raise_for_status()
        data = response.json()
        try:
            content = data["choices"][0]["message"]["content"]
        except (KeyError, IndexError, TypeError) as exc:
            raise RuntimeError(f"unexpected chat-completion response: {str(data)[:200]}") from exc
        return content or ""


class OpenRouterClient(ChatCompletionClient):
    def __init__(
        self,
        api_key: Optional[str] = None,
        model: str = "openai/gpt-4o-mini",
        temperature: float = 0.0,
        max_tokens: int = 1000,
        base_url: Optional[str] = None,
        timeout: float = 60.0,
    ):
        api_key = api_key or os.getenv("OPENROUTER_API_KEY")
        if not api_key:
            raise ValueError("OpenRouter API key not provided")
        super().__init__(
            base_url=base_url or "https://openrouter.ai/api/v1",
            api_key=api_key,
            model=model,
            temperature=temperature,
            max_tokens=max_tokens,
            timeout=timeout,
        )


def create_llm_client(provider: str, **kwargs) -> BaseLLMClient:
    providers = {
        "openrouter": OpenRouterClient,
        "openai-compatible": ChatCompletionClient,
    }
    provider_lower = provider.lower()
    if provider_lower not in providers:
        raise ValueError(f"Unknown provider: {provider}. Choose from {list(providers.keys())}")
    return providers[provider_lower](**kwargs)
