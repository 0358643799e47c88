"""
Celery tasks for Monte Carlo replica blocks.
"""
from typing import Any, Dict, List

from celery import shared_task

from .services import VarianceStudyService


@shared_task
def simulate_replica_block_task(
    theta: float,
    delta: float,
    delta_index: int,
    count: int,
    seed: int,
    estimators: List[str],
    start: int,
    stop: int,
) -> List[Dict[str, Any]]:
    """Simulate and estimate replicas start..stop-1 at one step of the grid."""
    return VarianceStudyService.simulate_block(
        theta=theta,
        delta=delta,
        delta_index=delta_index,
        count=count,
        seed=seed,
        estimators=estimators,
        start=start,
        stop=stop,
    )
