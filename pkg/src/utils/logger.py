"""
Módulo de logging do MorreyLab.
"""

import os
import logging
from logging.handlers import RotatingFileHandler
from typing import Dict, Optional, Union

# Nível de log padrão
DEFAULT_LOG_LEVEL = logging.INFO

# Formato padrão para as mensagens de log
LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'

# Dicionário para armazenar os loggers já criados
_loggers: Dict[str, logging.Logger] = {}


def _resolve_level(log_level: Union[int, str, None]) -> int:
    """Converte um nível de log textual ('DEBUG', 'info', ...) em inteiro."""
    if log_level is None:
        return DEFAULT_LOG_LEVEL
    if isinstance(log_level, str):
        level = logging.getLevelName(log_level.upper())
        return level if isinstance(level, int) else DEFAULT_LOG_LEVEL
    return int(log_level)


def setup_logger(
    name: Optional[str] = None,
    log_level: Union[int, str, None] = None,
    log_file: Optional[str] = None,
    max_bytes: int = 10 * 1024 * 1024,  # 10 MB
    backup_count: int = 5
) -> logging.Logger:
    """Configura e retorna um logger.

    Args:
        name: Nome do logger. Se None, configura o logger raiz.
        log_level: Nível de log (inteiro ou nome). Se None, usa o nível padrão.
        log_file: Caminho para o arquivo de log. Se None, não salva em arquivo.
        max_bytes: Tamanho máximo do arquivo de log antes de rotacionar.
        backup_count: Número de arquivos de backup a manter.

    Returns:
        logging.Logger: Instância do logger configurado.
    """
    key = name or 'root'

    # Se o logger já foi criado, apenas ajusta o nível
    if key in _loggers:
        _loggers[key].setLevel(_resolve_level(log_level))
        return _loggers[key]

    # O logger raiz do pacote é o logging.getLogger() sem nome
    logger = logging.getLogger(name)
    logger.setLevel(_resolve_level(log_level))

    formatter = logging.Formatter(LOG_FORMAT)

    console_handler = logging.StreamHandler()
    console_handler.setFormatter(formatter)
    logger.addHandler(console_handler)

    if log_file:
        try:
            # Garante que o diretório do arquivo de log existe
            os.makedirs(os.path.dirname(os.path.abspath(log_file)), exist_ok=True)

            file_handler = RotatingFileHandler(
                filename=log_file,
                maxBytes=max_bytes,
                backupCount=backup_count,
                encoding='utf-8'
            )
            file_handler.setFormatter(formatter)
            logger.addHandler(file_handler)

        except OSError as e:
            logger.error(f"Não foi possível configurar o arquivo de log '{log_file}': {e}")

    _loggers[key] = logger
    return logger


def get_logger(name: Optional[str] = None) -> logging.Logger:
    """Obtém um logger pelo nome. Se não existir, cria um novo.

    Args:
        name: Nome do logger. Se None, retorna o logger raiz.

    Returns:
        logging.Logger: Instância do logger.
    """
    key = name or 'root'
    if key in _loggers:
        return _loggers[key]
    return setup_logger(name)


def configure_root_logger(
    log_level: Union[int, str, None] = None,
    log_file: Optional[str] = None,
    max_bytes: int = 10 * 1024 * 1024,
    backup_count: int = 5
) -> logging.Logger:
    """Configura o logger raiz a partir das opções da seção 'logging'.

    Args:
        log_level: Nível de log. Se None, usa o nível padrão.
        log_file: Caminho para o arquivo de log. Se None, não salva em arquivo.
        max_bytes: Tamanho máximo do arquivo de log em bytes antes de rotacionar.
        backup_count: Número de arquivos de backup a manter.

    Returns:
        logging.Logger: O logger raiz.
    """
    return setup_logger(
        name=None,
        log_level=log_level,
        log_file=log_file,
        max_bytes=max_bytes,
        backup_count=backup_count
    )
