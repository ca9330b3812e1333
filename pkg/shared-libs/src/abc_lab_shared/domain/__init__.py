"""
Domain Module - ABC Lab Shared
Camada de domínio: entidades, modelos, enumerações e exceções
"""
