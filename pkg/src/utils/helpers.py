"""
Módulo com funções auxiliares do MorreyLab.
"""

import hashlib
import json
import math
import os
from datetime import datetime, timezone
from typing import Any, Union

from dateutil import parser, tz


def format_timestamp(
    timestamp: Union[float, int, str, datetime, None],
    timezone_name: str = 'UTC',
    fmt: str = '%Y-%m-%dT%H:%M:%S%z'
) -> str:
    """Formata um timestamp para uma string de data/hora legível.

    Args:
        timestamp: Timestamp Unix, string de data/hora ou objeto datetime.
        timezone_name: Nome do fuso horário para conversão.
        fmt: Formato de saída da data/hora.

    Returns:
        String formatada com a data/hora (vazia se o timestamp for inválido).
    """
    if timestamp is None:
        return ""

    if isinstance(timestamp, (int, float)):
        dt = datetime.fromtimestamp(timestamp, tz=timezone.utc)
    elif isinstance(timestamp, str):
        try:
            dt = parser.parse(timestamp)
        except (ValueError, TypeError, OverflowError):
            return ""
    elif isinstance(timestamp, datetime):
        dt = timestamp
    else:
        return ""

    zone = tz.gettz(timezone_name)
    if zone is not None:
        if dt.tzinfo is None:
            dt = dt.replace(tzinfo=timezone.utc)
        dt = dt.astimezone(zone)

    return dt.strftime(fmt)


def file_sha256(path: str, chunk_size: int = 1 << 16) -> str:
    """Calcula o hash sha256 de um arquivo.

    Args:
        path: Caminho do arquivo.
        chunk_size: Tamanho do bloco de leitura em bytes.

    Returns:
        Hash hexadecimal do conteúdo.
    """
    digest = hashlib.sha256()
    with open(path, 'rb') as f:
        for block in iter(lambda: f.read(chunk_size), b''):
            digest.update(block)
    return digest.hexdigest()


def _json_safe(value: Any) -> Any:
    """Converte valores numpy e não finitos em tipos aceitos pelo JSON."""
    if hasattr(value, 'item') and not isinstance(value, (list, tuple, dict)):
        try:
            value = value.item()
        except (ValueError, TypeError):
            pass
    if isinstance(value, float) and not math.isfinite(value):
        return None if math.isnan(value) else ("inf" if value > 0 else "-inf")
    if isinstance(value, dict):
        return {str(k): _json_safe(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_json_safe(v) for v in value]
    if hasattr(value, 'tolist'):
        return _json_safe(value.tolist())
    return value


def write_json(data: Any, path: str) -> str:
    """Grava um resumo JSON de forma determinística.

    Chaves ordenadas, indentação fixa e floats em representação exata:
    entradas idênticas produzem arquivos idênticos byte a byte.

    Args:
        data: Estrutura a ser gravada.
        path: Caminho do arquivo de saída.

    Returns:
        O caminho gravado.
    """
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, 'w', encoding='utf-8') as f:
        json.dump(_json_safe(data), f, indent=4, ensure_ascii=False, sort_keys=True)
        f.write('\n')
    return path
