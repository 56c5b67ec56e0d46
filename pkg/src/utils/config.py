"""
Módulo de configuração do MorreyLab.
"""

import os
import copy
import json
import logging
from typing import Any, Dict, Optional

from dotenv import load_dotenv

logger = logging.getLogger(__name__)

# Caminho para o arquivo de configuração
CONFIG_DIR = os.path.join(os.path.dirname(os.path.dirname(os.path.dirname(__file__))), 'config')
CONFIG_FILE = os.path.join(CONFIG_DIR, 'config.json')

# Variáveis de ambiente reconhecidas
ENV_CONFIG = 'MORREYLAB_CONFIG'
ENV_THREADS = 'MORREYLAB_THREADS'
ENV_LOG_LEVEL = 'MORREYLAB_LOG_LEVEL'

# Configuração padrão
DEFAULT_CONFIG: Dict[str, Any] = {
    "app": {
        "name": "MorreyLab",
        "version": "1.0.0"
    },
    "grid": {
        "h": 1.0 / 64.0,
        "domain": "disk"
    },
    "solver": {
        "kappa0": 1.0e-2,
        "anneal_stages": 6,
        "tol_p2": 1.0e-8,
        "tol": 1.0e-6,
        "max_iter": 200,
        "initial_step": 1.0,
        "backtrack": 0.5,
        "armijo": 1.0e-4,
        "polish": False
    },
    "spaces": {
        "ball_ratio": 0.7071067811865476,  # 2^(-1/2)
        "min_radius_cells": 4,
        "embedding_drift_tol": 0.1
    },
    "analysis": {
        "profile_ratio": 0.8408964152537145,  # 2^(-1/4)
        "window_min_cells": 8,
        "window_fraction": 0.25,
        "trials": 50,
        "seed": 42,
        "fp_trend_tol": 0.05,
        "exponent_tol": 0.05
    },
    "theory": {
        "gamma": 0.9
    },
    "output": {
        "dir": "runs",
        "plots": False
    },
    "database": {
        "path": os.path.join("data", "morreylab_results.db")
    },
    "logging": {
        "level": "INFO",
        "file": None
    },
    "parallel": {
        "threads": 4
    }
}


def load_config(config_path: Optional[str] = None) -> Dict[str, Any]:
    """Carrega a configuração a partir de um arquivo JSON.

    O caminho pode vir do argumento, da variável MORREYLAB_CONFIG (também
    lida de um arquivo .env) ou do caminho padrão. Valores ausentes são
    completados com DEFAULT_CONFIG e as variáveis de ambiente têm
    precedência sobre o arquivo.

    Args:
        config_path: Caminho para o arquivo de configuração.

    Returns:
        Dicionário com as configurações carregadas.
    """
    load_dotenv()
    if config_path is None:
        config_path = os.getenv(ENV_CONFIG, CONFIG_FILE)

    config = copy.deepcopy(DEFAULT_CONFIG)
    if os.path.exists(config_path):
        try:
            with open(config_path, 'r', encoding='utf-8') as f:
                config = _update_config(json.load(f), DEFAULT_CONFIG)
        except json.JSONDecodeError as e:
            logger.error(f"Erro ao decodificar o arquivo de configuração: {e}")
        except OSError as e:
            logger.error(f"Erro ao carregar o arquivo de configuração: {e}")
    else:
        logger.debug(f"Arquivo de configuração não encontrado em {config_path}; usando padrões")

    return _apply_environment(config)


def save_config(config: Dict[str, Any], config_path: Optional[str] = None) -> bool:
    """Salva a configuração em um arquivo JSON.

    Args:
        config: Dicionário com as configurações a serem salvas.
        config_path: Caminho para o arquivo de configuração.

    Returns:
        bool: True se o arquivo foi salvo com sucesso, False caso contrário.
    """
    if config_path is None:
        config_path = CONFIG_FILE

    try:
        os.makedirs(os.path.dirname(os.path.abspath(config_path)), exist_ok=True)
        with open(config_path, 'w', encoding='utf-8') as f:
            json.dump(config, f, indent=4, ensure_ascii=False)
        return True
    except OSError as e:
        logger.error(f"Erro ao salvar o arquivo de configuração: {e}")
        return False


def _update_config(config: Dict[str, Any], default_config: Dict[str, Any]) -> Dict[str, Any]:
    """Atualiza recursivamente um dicionário de configuração com valores padrão.

    Args:
        config: Dicionário de configuração a ser atualizado.
        default_config: Dicionário com os valores padrão.

    Returns:
        Dicionário de configuração atualizado.
    """
    if not isinstance(config, dict):
        return copy.deepcopy(default_config)

    result = copy.deepcopy(default_config)

    for key, value in config.items():
        if key in result and isinstance(result[key], dict) and isinstance(value, dict):
            result[key] = _update_config(value, result[key])
        else:
            result[key] = value

    return result


def _apply_environment(config: Dict[str, Any]) -> Dict[str, Any]:
    """Aplica as variáveis de ambiente sobre a configuração carregada."""
    threads = os.getenv(ENV_THREADS)
    if threads:
        try:
            config["parallel"]["threads"] = max(1, int(threads))
        except ValueError:
            logger.warning(f"{ENV_THREADS} inválido: '{threads}'; mantendo {config['parallel']['threads']}")

    level = os.getenv(ENV_LOG_LEVEL)
    if level:
        config["logging"]["level"] = level

    return config


def get_setting(config: Dict[str, Any], key: str, default: Any = None) -> Any:
    """Obtém um valor de configuração aninhado usando notação de ponto.

    Exemplo: get_setting(config, "solver.tol_p2", 1e-8)

    Args:
        config: Dicionário de configuração.
        key: Chave no formato "chave1.chave2.chave3".
        default: Valor padrão a ser retornado se a chave não existir.

    Returns:
        O valor da configuração ou o valor padrão se a chave não existir.
    """
    value: Any = config
    try:
        for k in key.split('.'):
            value = value[k]
        return value
    except (KeyError, TypeError):
        return default


def set_setting(config: Dict[str, Any], key: str, value: Any) -> None:
    """Define um valor de configuração aninhado usando notação de ponto.

    Args:
        config: Dicionário de configuração (modificado no lugar).
        key: Chave no formato "secao.chave".
        value: Valor a ser definido.
    """
    keys = key.split('.')
    current = config
    for k in keys[:-1]:
        current = current.setdefault(k, {})
    current[keys[-1]] = value
