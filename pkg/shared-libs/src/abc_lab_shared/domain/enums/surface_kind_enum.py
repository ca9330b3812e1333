from enum import Enum


class SurfaceKind(str, Enum):
    """Superfícies suportadas: cilindro, esfera e disco."""

    ANNULUS = "annulus"
    SPHERE = "sphere"
    DISK = "disk"

    @property
    def ambient_dim(self) -> int:
        return 3 if self is SurfaceKind.SPHERE else 2


class SchemeMode(str, Enum):
    ERGODIC = "ergodic"
    EMERGENCE = "emergence"


class RunMode(str, Enum):
    ERGODIC = "ergodic"
    EMERGENCE = "emergence"
    DIAGNOSE = "diagnose"
    TRANSPORT_CHECK = "transport-check"

    def scheme_mode(self) -> SchemeMode:
        return SchemeMode(self.value)
