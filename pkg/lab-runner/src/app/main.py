import argparse
import logging
import sys
from typing import List, Optional

from src.app.config import settings
from src.processor.lab_service import LabService

logging.basicConfig(
    level=getattr(logging, settings.LOG_LEVEL),
    format="%(asctime)s [%(levelname)s] %(message)s",
    handlers=[logging.StreamHandler()],
)
logger = logging.getLogger(__name__)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="abc-lab",
        description="Esquemas AbC, transporte ótimo e diagnósticos de ergodicidade e emergência em superfícies",
    )
    parser.add_argument("--threads", type=int, default=None, help="Threads de trabalho (padrão: nº de núcleos)")
    subparsers = parser.add_subparsers(dest="command", required=True)

    run = subparsers.add_parser("run", help="Executa um esquema ergódico ou de emergência")
    run.add_argument("--config", required=True, help="Arquivo JSON de configuração")
    run.add_argument("--out", default=None, help="Diretório de saída")

    kantorovich = subparsers.add_parser("kantorovich", help="Distância de Kantorovich entre duas medidas")
    kantorovich.add_argument("mu", help="Medida de origem (JSON)")
    kantorovich.add_argument("nu", help="Medida de destino (JSON)")
    kantorovich.add_argument("--plan", default=None, help="Grava o plano ótimo neste arquivo")

    diagnose = subparsers.add_parser("diagnose", help="Diagnósticos de um mapa serializado")
    diagnose.add_argument("--config", required=True, help="Arquivo JSON de configuração")
    diagnose.add_argument("--map", default=None, help="Mapa serializado (sobrepõe diagnose.map_file)")
    diagnose.add_argument("--out", default=None, help="Diretório de saída")

    check = subparsers.add_parser("check", help="Executa a suíte de propriedades")
    check.add_argument("--config", default=None, help="Arquivo JSON de configuração (sementes)")
    check.add_argument("--out", default=None, help="Diretório para check_results.json")

    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    if args.threads is not None and args.threads < 1:
        logger.error("--threads deve ser maior que 0")
        return 1

    logger.info(f"{settings.SERVICE_NAME} {settings.SERVICE_VERSION}: comando {args.command}")
    service = LabService(threads=args.threads)

    if args.command == "run":
        return service.cmd_run(args.config, out=args.out)
    if args.command == "kantorovich":
        return service.cmd_kantorovich(args.mu, args.nu, plan_path=args.plan)
    if args.command == "diagnose":
        return service.cmd_diagnose(args.config, map_path=args.map, out=args.out)
    return service.cmd_check(args.config, out=args.out)


if __name__ == "__main__":
    sys.exit(main())
