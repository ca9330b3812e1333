"""
Repository Module - ABC Lab Runner
Persistência dos artefatos de execução
"""

from .artifact_repository import ArtifactRepository

__all__ = ["ArtifactRepository"]
