"""
Exceções compartilhadas do MorreyLab.

Cada módulo define as suas próprias exceções específicas (GridError,
SolverError, ...) derivadas de MorreyLabError, no mesmo arquivo em que
elas são levantadas.
"""


class MorreyLabError(Exception):
    """Exceção base para todos os erros do laboratório."""
    pass


class HypothesisError(MorreyLabError, ValueError):
    """Hipótese de um teorema violada pelos parâmetros informados.

    A mensagem sempre começa pela desigualdade que falhou, por exemplo
    "p ≤ 2n/(λ+1)" ou "λ ≤ n−1".
    """
    pass
