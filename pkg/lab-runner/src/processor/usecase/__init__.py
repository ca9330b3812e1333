"""
UseCase Module - ABC Lab Runner
Estágios ergódico e de emergência, escolha de α e execução do esquema
"""

from .alpha_selection import choose_next_alpha
from .emergence_scheme_usecase import EmergenceSchemeUseCase
from .ergodic_scheme_usecase import ErgodicSchemeUseCase
from .scheme_runner_usecase import SchemeRunnerUseCase

__all__ = ["ErgodicSchemeUseCase", "EmergenceSchemeUseCase", "SchemeRunnerUseCase", "choose_next_alpha"]
