"""
Pacote principal do laboratório numérico MorreyLab.
"""

__version__ = '1.0.0'
__author__ = 'Equipe MorreyLab'
__description__ = 'Laboratório numérico para a equação p-Poisson com dados em espaços de Morrey'
