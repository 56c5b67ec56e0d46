"""
Módulo da interface de linha de comando: subcomandos e manifesto de execução.
"""

from .commands import (
    EXIT_PASS,
    EXIT_SOLVER,
    EXIT_USAGE,
    EXIT_VIOLATION,
    UsageError,
    build_parser,
    cmd_analyze,
    cmd_bench,
    cmd_predict,
    cmd_solve,
    cmd_verify,
    main,
)
from .manifest import MANIFEST_NAME, ManifestError, RunManifest, check_manifest

__all__ = [
    'EXIT_PASS',
    'EXIT_SOLVER',
    'EXIT_USAGE',
    'EXIT_VIOLATION',
    'UsageError',
    'build_parser',
    'cmd_analyze',
    'cmd_bench',
    'cmd_predict',
    'cmd_solve',
    'cmd_verify',
    'main',
    'MANIFEST_NAME',
    'ManifestError',
    'RunManifest',
    'check_manifest',
]
