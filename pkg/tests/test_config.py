import pytest

from sage.config import ENV_API_KEY, ENV_BACKEND_URL, config_to_dict, load_config, with_overrides
from sage.core.errors import ConfigError, MissingInput


def test_defaults():
    config = load_config(environ={})
    assert config.window == 400 and config.stride == 400
    assert config.top_k == 3
    assert config.threshold == 'best-f1'
    assert config.api_key is None


def test_file_then_flags_then_env(tmp_path):
    path = tmp_path / 'sage.yaml'
    path.write_text('window: 200\nstride: 100\nseed: 5\n', encoding='utf8')
    config = load_config(str(path), overrides={'stride': 50, 'seed': None},
                         environ={ENV_API_KEY: 'secret', ENV_BACKEND_URL: 'http://localhost:1'})
    assert (config.window, config.stride, config.seed) == (200, 50, 5)
    assert config.api_key == 'secret'
    assert 'api_key' not in config_to_dict(config)
    assert 'secret' not in repr(config)


def test_json_config_is_accepted(tmp_path):
    path = tmp_path / 'sage.json'
    path.write_text('{"threshold": "0.7", "use_icl": false}', encoding='utf8')
    config = load_config(str(path), environ={})
    assert config.threshold == 0.7 and config.use_icl is False


@pytest.mark.parametrize('text', [
    'api_key: leaked\n',
    'no_such_key: 1\n',
    'token_budget: 100\n',
    'threshold: sometimes\n',
    '- a list\n',
])
def test_bad_config(tmp_path, text):
    path = tmp_path / 'bad.yaml'
    path.write_text(text, encoding='utf8')
    with pytest.raises(ConfigError):
        load_config(str(path), environ={})


def test_missing_config_file():
    with pytest.raises(MissingInput):
        load_config('/nonexistent/sage.yaml', environ={})


def test_with_overrides_validates():
    config = load_config(environ={})
    assert with_overrides(config, jobs=4).jobs == 4
    with pytest.raises(ConfigError):
        with_overrides(config, train_fraction=1.5)
