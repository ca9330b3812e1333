"""
ABC Lab Runner - App Module
Interface de linha de comando do laboratório
"""

__version__ = "0.1.0"
__description__ = "Execução de esquemas AbC, transporte ótimo e diagnósticos em superfícies"
