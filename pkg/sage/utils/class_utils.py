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
from sage.agents.backends import HttpBackend, MockBackend, RuleBackend
from sage.core.errors import ConfigError


SAGE_BACKEND_CLASSES = {
    "rule": RuleBackend,
    "mock": MockBackend,
    "http": HttpBackend,
}


def build_backend(name, config):
    """Instantiate a completion backend by name from a SageConfig."""
    if name not in SAGE_BACKEND_CLASSES:
        raise ConfigError('unknown backend {}, choose from {}'.format(name, sorted(SAGE_BACKEND_CLASSES)))
    if name == 'mock':
        return MockBackend(directory=config.mock_dir, default='[]' if config.mock_dir is None else None)
    if name == 'http':
        return HttpBackend(config.backend_url, model=config.backend_model, api_key=config.api_key,
                           timeout=config.request_timeout, max_inflight=config.max_inflight)
    return RuleBackend()
