"""Runtime settings and the ordered thread-pool map used by parallel code paths."""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor, as_completed
from typing import Any, Callable, Dict, List, Optional, Sequence, TypeVar

from dotenv import load_dotenv
from pydantic import BaseModel, ConfigDict, Field

load_dotenv()

T = TypeVar("T")
R = TypeVar("R")

_ENV_FIELDS: Dict[str, str] = {
    "threads": "RHLS_THREADS",
    "sphere_nodes": "RHLS_SPHERE_NODES",
    "azimuth_nodes": "RHLS_AZIMUTH_NODES",
    "log_half_width": "RHLS_LOG_HALF_WIDTH",
    "log_step": "RHLS_LOG_STEP",
    "log_level": "RHLS_LOG_LEVEL",
}


class Settings(BaseModel):
    """Numerical defaults and worker count.

    Every field can be overridden by the matching ``RHLS_*`` environment
    variable (a ``.env`` file in the working directory is honored).

    Args:
        threads: Worker threads for row-parallel assembly and seed batches.
        sphere_nodes: Default node count of zonal grids.
        azimuth_nodes: Gauss nodes of the azimuthal average for n >= 2.
        log_half_width: Half width U of the logarithmic radius grid.
        log_step: Step h of the logarithmic radius grid.
        log_level: Logging level used by the command line.
    """

    model_config = ConfigDict(frozen=True)

    threads: int = Field(default_factory=lambda: os.cpu_count() or 1, ge=1)
    sphere_nodes: int = Field(default=256, ge=2)
    azimuth_nodes: int = Field(default=128, ge=8)
    log_half_width: float = Field(default=24.0, gt=0.0)
    log_step: float = Field(default=12.0 / 512.0, gt=0.0)
    log_level: str = "WARNING"


def get_settings(**overrides: Any) -> Settings:
    """Resolve settings: explicit argument, then environment variable, then default."""
    values: Dict[str, Any] = {}
    for name, env_var in _ENV_FIELDS.items():
        if overrides.get(name) is not None:
            values[name] = overrides[name]
        elif os.environ.get(env_var):
            values[name] = os.environ[env_var]
    return Settings.model_validate(values)


def ordered_map(
    fn: Callable[[T], R],
    items: Sequence[T],
    max_workers: Optional[int] = None,
) -> List[R]:
    """Apply ``fn`` to every item on a thread pool.

    Results come back in input order, so callers see the same output whatever
    the worker count. With one worker (or one item) the map runs inline.

    Args:
        fn: Function applied to each item.
        items: Inputs.
        max_workers: Pool size. Defaults to ``Settings.threads``.

    Returns:
        ``[fn(item) for item in items]``.
    """
    if not items:
        return []
    workers = max_workers if max_workers is not None else get_settings().threads
    workers = max(1, min(workers, len(items)))
    if workers == 1:
        return [fn(item) for item in items]

    results: Dict[int, R] = {}
    with ThreadPoolExecutor(max_workers=workers) as executor:
        future_to_index = {executor.submit(fn, item): i for i, item in enumerate(items)}
        for future in as_completed(future_to_index):
            results[future_to_index[future]] = future.result()
    return [results[i] for i in range(len(items))]
