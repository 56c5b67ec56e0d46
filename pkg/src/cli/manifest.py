"""
Manifesto de execução: registro dos arquivos gerados por um comando, com
hashes sha256 verificáveis por --check.
"""

import json
import logging
import os
import time
from dataclasses import asdict, dataclass, field
from typing import Any, Dict, List, Optional

from ..utils.exceptions import MorreyLabError
from ..utils.helpers import file_sha256, format_timestamp, write_json

logger = logging.getLogger(__name__)

MANIFEST_NAME = 'manifest.json'


class ManifestError(MorreyLabError):
    """Exceção para manifestos ausentes ou inválidos."""
    pass


@dataclass
class RunManifest:
    """Comando, configuração, malha, horários, saídas e resultado de uma execução."""
    command: str
    config: Dict[str, Any]
    grid: Dict[str, Any] = field(default_factory=dict)
    started_at: str = ""
    finished_at: str = ""
    outputs: Dict[str, str] = field(default_factory=dict)
    passed: Optional[bool] = None
    summary: Dict[str, Any] = field(default_factory=dict)

    @classmethod
    def start(cls, command: str, config: Dict[str, Any], grid: Optional[Dict[str, Any]] = None) -> "RunManifest":
        return cls(command=command, config=config, grid=grid or {}, started_at=format_timestamp(time.time()))

    def add_output(self, out_dir: str, path: str) -> str:
        """Registra um arquivo gerado (caminho relativo ao diretório de saída)."""
        relative = os.path.relpath(path, out_dir)
        self.outputs[relative] = file_sha256(path)
        return path

    def write(self, out_dir: str, passed: Optional[bool] = None) -> str:
        """Grava o manifesto por último, depois de todas as saídas."""
        if passed is not None:
            self.passed = bool(passed)
        self.finished_at = format_timestamp(time.time())
        path = write_json(asdict(self), os.path.join(out_dir, MANIFEST_NAME))
        logger.info(f"Manifesto gravado em {path} ({len(self.outputs)} saída(s))")
        return path

    @classmethod
    def load(cls, out_dir: str) -> "RunManifest":
        path = os.path.join(out_dir, MANIFEST_NAME)
        if not os.path.exists(path):
            raise ManifestError(f"manifest not found: {path}")
        try:
            with open(path, 'r', encoding='utf-8') as f:
                data = json.load(f)
            return cls(**data)
        except (json.JSONDecodeError, TypeError) as e:
            raise ManifestError(f"invalid manifest {path}: {e}") from e


def check_manifest(out_dir: str) -> List[str]:
    """Recalcula os hashes das saídas listadas no manifesto.

    Returns:
        Lista de problemas (vazia quando tudo confere).
    """
    manifest = RunManifest.load(out_dir)
    problems = []
    for relative, expected in sorted(manifest.outputs.items()):
        path = os.path.join(out_dir, relative)
        if not os.path.exists(path):
            problems.append(f"missing output: {relative}")
        elif file_sha256(path) != expected:
            problems.append(f"hash mismatch: {relative}")
    if problems:
        for problem in problems:
            logger.error(problem)
    else:
        logger.info(f"Manifesto em {out_dir}: {len(manifest.outputs)} saída(s) conferem")
    return problems
