"""
Testes das utilidades: configuração, funções auxiliares e logging.
"""

import json
import logging
import math
from datetime import datetime, timezone

import numpy as np

from src.utils import (
    DEFAULT_CONFIG,
    HypothesisError,
    MorreyLabError,
    configure_root_logger,
    file_sha256,
    format_timestamp,
    get_logger,
    get_setting,
    load_config,
    save_config,
    set_setting,
    setup_logger,
    write_json,
)


class TestConfig:
    def test_missing_file_gives_defaults(self, tmp_path):
        config = load_config(str(tmp_path / "absent.json"))
        assert config == DEFAULT_CONFIG
        assert config is not DEFAULT_CONFIG

    def test_partial_file_is_merged(self, config_file, tmp_path):
        config = load_config(config_file)
        assert config['output']['dir'] == str(tmp_path / "runs")
        assert config['parallel']['threads'] == 1
        assert config['solver']['tol_p2'] == 1e-8
        assert config['grid']['domain'] == 'disk'

    def test_invalid_json_falls_back(self, tmp_path):
        path = tmp_path / "broken.json"
        path.write_text("{ not json", encoding='utf-8')
        assert load_config(str(path))['grid'] == DEFAULT_CONFIG['grid']

    def test_environment_overrides(self, config_file, monkeypatch):
        monkeypatch.setenv('MORREYLAB_THREADS', '8')
        monkeypatch.setenv('MORREYLAB_LOG_LEVEL', 'DEBUG')
        config = load_config(config_file)
        assert config['parallel']['threads'] == 8
        assert config['logging']['level'] == 'DEBUG'

    def test_invalid_thread_count_is_ignored(self, config_file, monkeypatch):
        monkeypatch.setenv('MORREYLAB_THREADS', 'many')
        assert load_config(config_file)['parallel']['threads'] == 1

    def test_config_path_from_environment(self, config_file, monkeypatch, tmp_path):
        monkeypatch.setenv('MORREYLAB_CONFIG', config_file)
        assert load_config()['output']['dir'] == str(tmp_path / "runs")

    def test_save_and_reload(self, tmp_path):
        path = str(tmp_path / "sub" / "config.json")
        config = load_config(str(tmp_path / "absent.json"))
        set_setting(config, 'grid.h', 0.03125)
        assert save_config(config, path)
        assert load_config(path)['grid']['h'] == 0.03125

    def test_save_failure_returns_false(self, tmp_path):
        blocker = tmp_path / "file"
        blocker.write_text("x", encoding='utf-8')
        assert save_config({}, str(blocker / "config.json")) is False

    def test_dot_notation(self):
        config = {'a': {'b': {'c': 1}}}
        assert get_setting(config, 'a.b.c') == 1
        assert get_setting(config, 'a.x', 'padrão') == 'padrão'
        assert get_setting(config, 'a.b.c.d') is None
        set_setting(config, 'a.e.f', 2)
        assert config['a']['e'] == {'f': 2}


class TestHelpers:
    def test_format_timestamp(self):
        assert format_timestamp(0) == '1970-01-01T00:00:00+0000'
        assert format_timestamp('2026-03-01T12:00:00Z', fmt='%Y-%m-%d %H:%M') == '2026-03-01 12:00'
        assert format_timestamp(datetime(2026, 1, 2, tzinfo=timezone.utc), fmt='%d/%m/%Y') == '02/01/2026'
        assert format_timestamp('não é data') == ''
        assert format_timestamp(None) == ''

    def test_file_sha256(self, tmp_path):
        path = tmp_path / "data.bin"
        path.write_bytes(b"abc")
        assert file_sha256(str(path)) == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"

    def test_write_json_is_deterministic(self, tmp_path):
        data = {'b': np.float64(0.5), 'a': [np.int64(2), math.inf, math.nan], 'c': np.array([1.0, -math.inf])}
        first = write_json(data, str(tmp_path / "x" / "a.json"))
        second = write_json(dict(reversed(list(data.items()))), str(tmp_path / "b.json"))
        with open(first, 'rb') as f1, open(second, 'rb') as f2:
            assert f1.read() == f2.read()
        with open(first, encoding='utf-8') as f:
            loaded = json.load(f)
        assert loaded == {'a': [2, 'inf', None], 'b': 0.5, 'c': [1.0, '-inf']}


class TestExceptions:
    def test_hierarchy(self):
        error = HypothesisError("p > n: p=3, n=2")
        assert isinstance(error, MorreyLabError)
        assert isinstance(error, ValueError)


class TestLogger:
    def test_setup_logger_writes_file(self, tmp_path):
        log_file = str(tmp_path / "logs" / "lab.log")
        logger = setup_logger('morreylab.test.file', 'debug', log_file)
        logger.debug("mensagem de teste")
        for handler in logger.handlers:
            handler.flush()
        assert logger.level == logging.DEBUG
        with open(log_file, encoding='utf-8') as f:
            assert "mensagem de teste" in f.read()

    def test_loggers_are_cached(self):
        first = setup_logger('morreylab.test.cache', 'INFO')
        second = setup_logger('morreylab.test.cache', 'WARNING')
        assert first is second
        assert second.level == logging.WARNING
        assert get_logger('morreylab.test.cache') is first

    def test_unknown_level_falls_back_to_info(self):
        assert setup_logger('morreylab.test.level', 'LOUD').level == logging.INFO

    def test_configure_root_logger(self):
        root = configure_root_logger('WARNING')
        assert root is logging.getLogger()
        assert root.level == logging.WARNING
