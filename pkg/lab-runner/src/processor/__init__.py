"""
ABC Lab Runner - Processor Module
Serviços numéricos, casos de uso dos esquemas e persistência de artefatos
"""

__version__ = "0.1.0"
