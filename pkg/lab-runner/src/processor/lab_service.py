import logging
from fractions import Fraction
from functools import partial
from typing import Any, Dict, List, Optional, Sequence

import numpy as np
from abc_lab_shared.domain.entities import (
    Conjugate,
    MapExpr,
    Rotation,
    SchemeState,
    ergodic_epsilon,
    reduce_rotation,
)
from abc_lab_shared.domain.enums import RunMode, SchemeMode
from abc_lab_shared.domain.exceptions import LabException, StageFailed
from abc_lab_shared.domain.models import CheckConfig, RunConfig, RunManifest
from abc_lab_shared.geometry import grid_radius, tolerance_scale

from src.app.command_handler import run_jobs
from src.app.config import settings
from src.processor.repository.artifact_repository import ArtifactRepository
from src.processor.services.diagnostics_service import DiagnosticsService
from src.processor.services.kicker_service import KickerService
from src.processor.services.map_service import MapService
from src.processor.services.profile_cache_service import ProfileCacheService
from src.processor.services.property_suite_service import PropertySuiteService
from src.processor.services.separation_service import SeparationService
from src.processor.services.transport_service import TransportService
from src.processor.usecase.emergence_scheme_usecase import EmergenceSchemeUseCase
from src.processor.usecase.ergodic_scheme_usecase import ErgodicSchemeUseCase
from src.processor.usecase.scheme_runner_usecase import SchemeRunnerUseCase
from src.processor.utils.error_handler import (
    EXIT_ERROR,
    EXIT_OK,
    EXIT_STAGE_FAILED,
    ErrorCode,
    ErrorHandler,
    LabError,
)

logger = logging.getLogger(__name__)


def default_scales(config: RunConfig, states: Sequence[SchemeState] = ()) -> List[float]:
    """Escalas pedidas na configuração; senão η_n/2 de cada estágio mais uma varredura geométrica."""
    if config.diagnostics.scales:
        return list(config.diagnostics.scales)
    scales = {state.eta / 2.0 for state in states if state.eta is not None}
    if config.diagnostics.sweep:
        scales.update(float(s) for s in np.geomspace(0.5, 0.5**config.diagnostics.sweep, config.diagnostics.sweep))
    return sorted(scales, reverse=True)


def orbit_period(expr: MapExpr, fallback: Optional[int]) -> int:
    """Período da órbita usado como proxy de e^f: diagnose.q ou o denominador de α em h∘R_α∘h⁻¹."""
    if fallback is not None:
        return fallback
    if isinstance(expr, Conjugate) and isinstance(expr.base, Rotation):
        alpha = reduce_rotation(expr.base.alpha)
        if isinstance(alpha, Fraction):
            return alpha.denominator
    raise LabError("diagnose.q é obrigatório para mapas sem rotação racional conjugada", ErrorCode.CONFIG_ERROR)


class LabService:
    def __init__(self, threads: Optional[int] = None):
        self.threads = threads or settings.THREADS

    def build_services(self, config: RunConfig) -> Dict[str, Any]:
        resolutions = config.resolutions
        map_service = MapService(fd_step=config.scheme.fd_step)
        transport_service = TransportService(map_service, support_cap=resolutions.support_cap, threads=self.threads)
        separation_service = SeparationService(
            transport_service,
            ProfileCacheService(),
            y_grid=resolutions.y_grid,
            eta_grid=resolutions.eta_grid,
            measure_support=resolutions.measure_support,
        )
        kicker_service = KickerService(
            transport_service,
            separation_service,
            box_cap=resolutions.kicker_box_cap,
            y_grid=resolutions.kicker_y_grid,
        )
        return {
            "map": map_service,
            "transport": transport_service,
            "separation": separation_service,
            "kicker": kicker_service,
            "diagnostics": DiagnosticsService(transport_service, separation_service),
        }

    def _fail(self, error: Exception, command: str) -> int:
        ErrorHandler.create_error_response(error, command=command)
        return ErrorHandler.exit_code_for(error)

    def cmd_run(self, config_path: str, out: Optional[str] = None) -> int:
        try:
            config = ArtifactRepository.read_config(config_path)
            if config.mode not in (RunMode.ERGODIC, RunMode.EMERGENCE):
                raise LabError(
                    f"Modo {config.mode.value} não executa esquema; use diagnose ou check", ErrorCode.CONFIG_ERROR
                )
        except Exception as e:
            return self._fail(e, "run")

        repository = ArtifactRepository(settings.resolve_output_dir(out, config.output_dir))
        services = self.build_services(config)
        runner = SchemeRunnerUseCase(
            ErgodicSchemeUseCase(services["map"], services["transport"], services["kicker"], config),
            EmergenceSchemeUseCase(services["map"], services["separation"], services["kicker"], config),
            config,
        )
        logger.info(f"Execução {config.mode.value} em {config.surface.value}: {config.stages} estágios")

        try:
            states, f = runner.run_scheme()
        except StageFailed as e:
            logger.error(f"Estágio {e.stage_index} falhou na condição {e.condition_id}")
            repository.write_stage_ledgers(runner.states)
            repository.write_failure_ledger(e.stage_index, e.condition_id, e.ledger)
            repository.write_timings(runner.timings)
            self._write_manifest(repository, config, runner.states, passed=False, failed_condition=e.condition_id)
            return ErrorHandler.exit_code_for(e)
        except Exception as e:
            logger.exception(f"Erro inesperado na execução do esquema: {e}")
            return self._fail(e, "run")

        repository.write_stage_ledgers(states)
        repository.write_map(f)
        repository.write_timings(runner.timings)
        self.write_run_diagnostics(repository, services["diagnostics"], config, states, f)

        passed = all(state.passed for state in states)
        self._write_manifest(repository, config, states, passed=passed)
        logger.info(f"Execução concluída em {repository.output_dir}: {'aprovada' if passed else 'reprovada'}")
        return EXIT_OK if passed else EXIT_STAGE_FAILED

    def _write_manifest(
        self,
        repository: ArtifactRepository,
        config: RunConfig,
        states: Sequence[SchemeState],
        passed: bool,
        failed_condition: Optional[str] = None,
    ) -> None:
        manifest = RunManifest(
            version=settings.SERVICE_VERSION,
            mode=config.mode.value,
            surface=config.surface,
            stages=config.stages,
            completed_stages=max(0, len(states) - 1),
            passed=passed,
            failed_condition=failed_condition,
            config=config.model_dump(mode="json"),
        )
        repository.write_manifest(manifest)

    def write_run_diagnostics(
        self,
        repository: ArtifactRepository,
        diagnostics: DiagnosticsService,
        config: RunConfig,
        states: Sequence[SchemeState],
        f: MapExpr,
    ) -> None:
        final = states[-1]
        if final.n == 0:
            return
        seed = config.seeds.diagnostics
        summary: Dict[str, Any] = {"errors": {}}

        def attempt(name: str, job) -> Any:
            try:
                return job()
            except LabException as e:
                logger.warning(f"Diagnóstico {name} omitido: {e.error_message}")
                summary["errors"][name] = e.error_message
                return None

        if final.mode is SchemeMode.ERGODIC and config.diagnostics.ergodicity:
            previous_eps = ergodic_epsilon(max(0, final.n - 2)) * tolerance_scale(final.kind)
            radius = grid_radius(final.kind, config.resolutions.leb_grid)
            threshold = config.diagnostics.threshold or previous_eps + radius
            report = attempt(
                "ergodicity",
                lambda: diagnostics.ergodicity_report(
                    f,
                    final.q,
                    final.eps,
                    config.diagnostics.samples,
                    config.resolutions.leb_grid,
                    seed,
                    threshold,
                    h=final.h,
                ),
            )
            if report is not None:
                repository.write_json("ergodicity.json", report)

        if final.mode is SchemeMode.EMERGENCE and config.diagnostics.emergence:
            reports = attempt(
                "emergence",
                lambda: diagnostics.emergence_order_estimate(
                    f, final.q, default_scales(config, states), config.diagnostics.emergence_samples, seed
                ),
            )
            if reports:
                repository.write_curves(reports)
            fact = attempt(
                "fact_emer",
                lambda: diagnostics.fact_emer_check(
                    final, final.h, config.diagnostics.samples, config.diagnostics.emergence_samples, seed
                ),
            )
            if fact is not None:
                summary["fact_emer"] = fact.model_dump(mode="json")
            profile = attempt("separation_profile", lambda: diagnostics.separation_profile(final.h, None, None))
            if profile is not None:
                repository.write_separation_profile(*profile)

        summary["full_measure_fraction"] = attempt(
            "full_measure_fraction",
            lambda: diagnostics.full_measure_fraction(
                [(state.h, state.eps) for state in states[1:]], final.kind, config.diagnostics.samples, seed
            ),
        )
        repository.write_json("diagnostics.json", summary)

    def cmd_kantorovich(self, mu_path: str, nu_path: str, plan_path: Optional[str] = None) -> int:
        try:
            mu = ArtifactRepository.read_measure(mu_path)
            nu = ArtifactRepository.read_measure(nu_path)
            transport = TransportService(MapService(), threads=self.threads)
            value, plan = transport.kantorovich(mu, nu)
        except Exception as e:
            return self._fail(e, "kantorovich")

        print(f"{value:.12g}")
        if plan_path:
            ArtifactRepository.write_plan(plan_path, plan)
        return EXIT_OK

    def cmd_diagnose(self, config_path: str, map_path: Optional[str] = None, out: Optional[str] = None) -> int:
        try:
            config = ArtifactRepository.read_config(config_path)
            map_file = map_path or config.diagnose.map_file
            if not map_file:
                raise LabError("Nenhum arquivo de mapa informado (--map ou diagnose.map_file)", ErrorCode.CONFIG_ERROR)
            f = ArtifactRepository.read_map(map_file)
            if f.kind is not config.surface:
                raise LabError(
                    f"Mapa em {f.kind.value} e configuração em {config.surface.value}", ErrorCode.SURFACE_MISMATCH
                )
            q = orbit_period(f, config.diagnose.q)
        except Exception as e:
            return self._fail(e, "diagnose")

        repository = ArtifactRepository(settings.resolve_output_dir(out, config.output_dir))
        diagnostics = self.build_services(config)["diagnostics"]
        seed = config.seeds.diagnostics
        logger.info(f"Diagnóstico de {map_file} com q={q}")

        try:
            if config.diagnostics.ergodicity:
                report = diagnostics.ergodicity_report(
                    f,
                    q,
                    config.diagnostics.region_eta or 0.0,
                    config.diagnostics.samples,
                    config.resolutions.leb_grid,
                    seed,
                    config.diagnostics.threshold,
                )
                repository.write_json("ergodicity.json", report)

            if config.diagnostics.emergence:
                reports = diagnostics.emergence_order_estimate(
                    f, q, default_scales(config), config.diagnostics.emergence_samples, seed
                )
                repository.write_curves(reports)

            h = f.conjugacy if isinstance(f, Conjugate) else f
            repository.write_separation_profile(*diagnostics.separation_profile(h, None, None))
        except Exception as e:
            return self._fail(e, "diagnose")

        self._write_manifest(repository, config, [], passed=True)
        return EXIT_OK

    def cmd_check(self, config_path: Optional[str] = None, out: Optional[str] = None) -> int:
        try:
            config = ArtifactRepository.read_config(config_path) if config_path else None
        except Exception as e:
            return self._fail(e, "check")

        seed = config.seeds.sampling if config else 0
        check = config.check if config else CheckConfig()
        transport = TransportService(MapService(), threads=1)
        separation = SeparationService(transport)
        suite = PropertySuiteService(
            transport,
            KickerService(transport, separation),
            seed=seed,
            trials=check.trials,
            monte_carlo_samples=check.monte_carlo_samples,
            sigma_bound=check.sigma_bound,
        )

        results = run_jobs({name: partial(suite.run_check, name) for name in suite.checks()})
        payload, passed = [], True
        for item in results:
            if item["success"]:
                result = item["result"]
                payload.append(result.model_dump(mode="json"))
                passed &= result.passed
            else:
                payload.append({"name": item["name"], "passed": False, "error": item["error"]})
                passed = False

        output_dir = out or settings.OUTPUT_DIR_OVERRIDE or (config.output_dir if config else None)
        if output_dir:
            ArtifactRepository(output_dir).write_json("check_results.json", {"passed": passed, "checks": payload})
        for entry in payload:
            logger.info(f"Verificação {entry['name']}: {'ok' if entry['passed'] else 'FALHOU'}")
        return EXIT_OK if passed else EXIT_ERROR
