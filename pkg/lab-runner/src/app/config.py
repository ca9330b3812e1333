import os
from functools import lru_cache

from dotenv import load_dotenv

load_dotenv()


class Settings:
    def __init__(self):
        self.LOG_LEVEL = os.getenv("LOG_LEVEL", "INFO").upper()

        self.SERVICE_NAME = "abc-lab-runner"
        self.SERVICE_VERSION = "0.1.0"

        # Única configuração de execução vinda do ambiente
        self.OUTPUT_DIR_OVERRIDE = os.getenv("ABC_LAB_OUTPUT_DIR") or None

        self.SUPPORT_CAP = 4096
        self.KICKER_BOX_CAP = 2**18
        self.FD_STEP = 1e-5
        self.SOLVER_MAX_ITER = 10_000_000
        self.ORBIT_CHUNK = 2**18

        self.Y_GRID = 64
        self.MEASURE_SUPPORT = 64
        self.ETA_GRID = 48
        self.ETA_GRID_FLOOR = 2.0**-10

        self.MAX_RETRY_ATTEMPTS = 3
        self.MAX_KICKER_DOUBLINGS = 12

        self.THREADS = os.cpu_count() or 1

    def resolve_output_dir(self, cli_value: str = None, config_value: str = None) -> str:
        return cli_value or self.OUTPUT_DIR_OVERRIDE or config_value or "runs/latest"

    def validate(self) -> None:
        errors = []

        if self.LOG_LEVEL not in ["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"]:
            errors.append(f"LOG_LEVEL inválido: {self.LOG_LEVEL}")

        if self.SUPPORT_CAP < 64:
            errors.append("SUPPORT_CAP deve ser ao menos 64")

        if not (0.0 < self.FD_STEP < 1e-2):
            errors.append("FD_STEP deve estar entre 0 e 1e-2")

        if self.THREADS < 1:
            errors.append("THREADS deve ser maior que 0")

        if errors:
            raise ValueError(f"Erros de configuração: {'; '.join(errors)}")


@lru_cache()
def get_settings() -> Settings:
    settings_instance = Settings()
    settings_instance.validate()
    return settings_instance


settings = get_settings()
