import json
from fractions import Fraction
from typing import Any, Dict

from abc_lab_shared.domain.entities import (
    BoxExchange,
    BoxExchangeSpec,
    Compose,
    Conjugate,
    Identity,
    Inverse,
    MapExpr,
    Rotation,
)
from abc_lab_shared.domain.entities.map_expr import RotationNumber
from abc_lab_shared.domain.enums import SurfaceKind

FORMAT_VERSION = 1


class MapExprMapper:
    """Documento JSON com árvore etiquetada por nó; racionais como {p, q}."""

    @staticmethod
    def rotation_number_to_dict(alpha: RotationNumber) -> Dict[str, Any]:
        if isinstance(alpha, Fraction):
            return {"p": alpha.numerator, "q": alpha.denominator}
        return {"real": float(alpha)}

    @staticmethod
    def rotation_number_from_dict(data: Dict[str, Any]) -> RotationNumber:
        if "real" in data:
            return float(data["real"])
        q = int(data["q"])
        if q < 1:
            raise ValueError(f"Denominador inválido: {q}")
        return Fraction(int(data["p"]), q)

    @staticmethod
    def node_to_dict(expr: MapExpr) -> Dict[str, Any]:
        if isinstance(expr, Identity):
            return {"node": "identity"}
        if isinstance(expr, Rotation):
            return {"node": "rotation", "alpha": MapExprMapper.rotation_number_to_dict(expr.alpha)}
        if isinstance(expr, BoxExchange):
            spec = expr.spec
            return {
                "node": "box_exchange",
                "n_theta": spec.n_theta,
                "n_y": spec.n_y,
                "q_equivariance": spec.q_equivariance,
                "y_margin": spec.y_margin,
                "perm": spec.perm.tolist(),
            }
        if isinstance(expr, Compose):
            return {
                "node": "compose",
                "outer": MapExprMapper.node_to_dict(expr.outer),
                "inner": MapExprMapper.node_to_dict(expr.inner),
            }
        if isinstance(expr, Inverse):
            return {"node": "inverse", "base": MapExprMapper.node_to_dict(expr.base)}
        if isinstance(expr, Conjugate):
            return {
                "node": "conjugate",
                "conjugacy": MapExprMapper.node_to_dict(expr.conjugacy),
                "base": MapExprMapper.node_to_dict(expr.base),
            }
        raise TypeError(f"Nó de mapa não suportado: {type(expr).__name__}")

    @staticmethod
    def node_from_dict(kind: SurfaceKind, data: Dict[str, Any]) -> MapExpr:
        node = data.get("node")
        if node == "identity":
            return Identity(kind)
        if node == "rotation":
            return Rotation(kind, MapExprMapper.rotation_number_from_dict(data["alpha"]))
        if node == "box_exchange":
            spec = BoxExchangeSpec(
                n_theta=int(data["n_theta"]),
                n_y=int(data["n_y"]),
                perm=data["perm"],
                q_equivariance=int(data.get("q_equivariance", 1)),
                y_margin=float(data.get("y_margin", 0.0)),
            )
            return BoxExchange(kind, spec)
        if node == "compose":
            return Compose(
                kind,
                MapExprMapper.node_from_dict(kind, data["outer"]),
                MapExprMapper.node_from_dict(kind, data["inner"]),
            )
        if node == "inverse":
            return Inverse(kind, MapExprMapper.node_from_dict(kind, data["base"]))
        if node == "conjugate":
            return Conjugate(
                kind,
                MapExprMapper.node_from_dict(kind, data["conjugacy"]),
                MapExprMapper.node_from_dict(kind, data["base"]),
            )
        raise ValueError(f"Tipo de nó desconhecido: {node!r}")

    @staticmethod
    def to_dict(expr: MapExpr) -> Dict[str, Any]:
        return {"version": FORMAT_VERSION, "surface": expr.kind.value, "map": MapExprMapper.node_to_dict(expr)}

    @staticmethod
    def from_dict(data: Dict[str, Any]) -> MapExpr:
        try:
            kind = SurfaceKind(data["surface"])
            return MapExprMapper.node_from_dict(kind, data["map"])
        except KeyError as e:
            raise ValueError(f"Campo obrigatório ausente no mapa: {e}") from e

    @staticmethod
    def to_json(expr: MapExpr) -> str:
        return json.dumps(MapExprMapper.to_dict(expr), separators=(",", ":"))

    @staticmethod
    def from_json(text: str) -> MapExpr:
        return MapExprMapper.from_dict(json.loads(text))
