"""
Ponto de entrada principal do MorreyLab.

Uso: python -m src.main <subcomando> [opções]
"""

import sys

from src.cli import main


if __name__ == "__main__":
    sys.exit(main())
