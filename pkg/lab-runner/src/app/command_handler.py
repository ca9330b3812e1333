import asyncio
import logging
import time
from typing import Any, Callable, Dict, List

logger = logging.getLogger(__name__)


async def run_job_async(name: str, job: Callable[[], Any]) -> Dict[str, Any]:
    started = time.perf_counter()
    try:
        result = await asyncio.to_thread(job)
        logger.info(f"Tarefa {name} concluída em {time.perf_counter() - started:.2f}s")
        return {"success": True, "name": name, "result": result}
    except Exception as e:
        logger.exception(f"Erro ao executar tarefa {name}: {e}")
        return {"success": False, "name": name, "error": str(e), "error_type": type(e).__name__}


async def run_all_jobs(jobs: Dict[str, Callable[[], Any]]) -> List[Dict[str, Any]]:
    tasks = [run_job_async(name, job) for name, job in jobs.items()]
    return await asyncio.gather(*tasks)


def run_jobs(jobs: Dict[str, Callable[[], Any]]) -> List[Dict[str, Any]]:
    """Executa tarefas independentes em threads; a saída segue a ordem de jobs."""
    if not jobs:
        logger.warning("Nenhuma tarefa para executar")
        return []

    results = asyncio.run(run_all_jobs(jobs))
    successful = sum(1 for r in results if r.get("success"))
    logger.info(f"Tarefas concluídas - Sucesso: {successful}, Falhas: {len(results) - successful}")
    return results
