# Copyright (c) 2025 SAGE contributors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#   http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
"""Completion backends: HTTP client, scripted mock and the rule marker."""

import base64
import hashlib
import os
import threading
from collections import deque
from typing import Iterable, List, NamedTuple, Optional

import requests

from sage.agents.prompts import PromptBundle
from sage.core.errors import BackendUnavailable, ConfigError
from sage.represent.summary import estimate_tokens
from sage.utils.file_utils import logging


class Completion(NamedTuple):
    text: str
    prompt_tokens: int
    completion_tokens: int


def prompt_hash(prompt: PromptBundle) -> str:
    """Stable key of a rendered prompt (role, texts and attached images)."""
    digest = hashlib.sha256()
    for part in (prompt.version, prompt.role, prompt.system, prompt.user):
        digest.update(part.encode('utf8'))
        digest.update(b'\0')
    for image in prompt.images:
        digest.update(hashlib.sha256(image).digest())
    return digest.hexdigest()[:16]


class CompletionBackend:
    name = 'base'
    serves_completions = True

    def complete(self, prompt: PromptBundle) -> Completion:
        raise NotImplementedError


class RuleBackend(CompletionBackend):
    """Marker for the deterministic rubric; the detector scores without a model."""
    name = 'rule'
    serves_completions = False

    def complete(self, prompt: PromptBundle) -> Completion:
        raise BackendUnavailable('the rule backend does not serve completions')


class MockBackend(CompletionBackend):
    """Canned answers for offline runs.

    Lookup order: ``<prompt hash>.txt`` under ``directory``, then the next
    scripted response, then ``default.txt`` / ``default``.
    """
    name = 'mock'

    def __init__(self, directory: Optional[str] = None, responses: Iterable[str] = (), default: Optional[str] = None):
        self.directory = directory
        self.responses = deque(responses)
        self.default = default
        self.calls: List[PromptBundle] = []
        self.lock = threading.Lock()
        if directory is not None and not os.path.isdir(directory):
            raise ConfigError('mock response directory {} not found'.format(directory))

    def _read(self, name):
        path = os.path.join(self.directory, name)
        if os.path.exists(path):
            with open(path, 'r', encoding='utf8') as f:
                return f.read()
        return None

    def complete(self, prompt: PromptBundle) -> Completion:
        key = prompt_hash(prompt)
        with self.lock:
            self.calls.append(prompt)
            text = self._read(key + '.txt') if self.directory else None
            if text is None and self.responses:
                text = self.responses.popleft()
            if text is None and self.directory:
                text = self._read('default.txt')
            if text is None:
                text = self.default
        if text is None:
            raise BackendUnavailable('no canned response for prompt {} ({})'.format(key, prompt.role))
        logging.debug('mock backend answered prompt {}'.format(key))
        return Completion(text=text, prompt_tokens=prompt.estimated_tokens, completion_tokens=estimate_tokens(text))


class HttpBackend(CompletionBackend):
    """Provider-neutral JSON endpoint.

    Sends ``{model, messages, temperature, images}`` and reads either a
    ``text`` field or ``choices[0].message.content``; in-flight requests are
    capped by a bounded semaphore.
    """
    name = 'http'

    def __init__(self, url: Optional[str], model: Optional[str] = None, api_key: Optional[str] = None,
                 timeout: float = 60.0, max_inflight: int = 4, session: Optional[requests.Session] = None):
        if not url:
            raise ConfigError('the http backend needs SAGE_BACKEND_URL')
        self.url = url
        self.model = model
        self.api_key = api_key
        self.timeout = timeout
        self.slots = threading.BoundedSemaphore(max_inflight)
        self.session = session or requests.Session()

    def payload(self, prompt: PromptBundle) -> dict:
        return {'model': self.model,
                'temperature': 0.0,
                'messages': [{'role': 'system', 'content': prompt.system},
                             {'role': 'user', 'content': prompt.user}],
                'images': [base64.b64encode(image).decode('ascii') for image in prompt.images]}

    def complete(self, prompt: PromptBundle) -> Completion:
        headers = {'Content-Type': 'application/json'}
        if self.api_key:
            headers['Authorization'] = 'Bearer {}'.format(self.api_key)
        with self.slots:
            try:
                response = self.session.post(self.url, json=self.payload(prompt), headers=headers,
                                             timeout=self.timeout)
                response.raise_for_status()
                body = response.json()
            except (requests.RequestException, ValueError) as e:
                raise BackendUnavailable('completion request to {} failed: {}'.format(self.url, e))
        if isinstance(body, dict) and 'text' in body:
            text = body['text']
        else:
            try:
                text = body['choices'][0]['message']['content']
            except (KeyError, IndexError, TypeError):
                raise BackendUnavailable('completion response from {} has no text'.format(self.url))
        usage = body.get('usage', {}) if isinstance(body, dict) else {}
        return Completion(text=str(text),
                          prompt_tokens=int(usage.get('prompt_tokens', prompt.estimated_tokens)),
                          completion_tokens=int(usage.get('completion_tokens', estimate_tokens(str(text)))))
