#!/usr/bin/env python3
"""
Script de inicialização do MorreyLab.
"""

import os
import sys
import logging
from pathlib import Path

# Adiciona o diretório raiz ao path para importações absolutas
sys.path.insert(0, str(Path(__file__).parent.absolute()))

logging.basicConfig(
    level=logging.INFO,
    format='%(asctime)s - %(name)s - %(levelname)s - %(message)s'
)
logger = logging.getLogger(__name__)


def check_environment() -> bool:
    """Garante as pastas de dados, logs e saídas."""
    try:
        for folder in ('data', 'logs', 'runs'):
            os.makedirs(folder, exist_ok=True)
        return True
    except OSError as e:
        logger.error(f"Erro ao verificar o ambiente: {e}")
        return False


def main() -> int:
    if not check_environment():
        logger.error("Falha na verificação do ambiente.")
        return 1

    try:
        from src.cli import main as cli_main
    except ImportError as e:
        logger.error(f"Erro ao importar dependências: {e}")
        logger.error("Instale as dependências com: pip install -r requirements.txt")
        return 1

    return cli_main(sys.argv[1:])


if __name__ == '__main__':
    sys.exit(main())
