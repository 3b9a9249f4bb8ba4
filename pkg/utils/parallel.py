import os

from joblib import Parallel, delayed

ROW_BLOCK = 16


def default_workers():
    return os.cpu_count() or 1


def row_blocks(n_rows, block=ROW_BLOCK):
    """Half-open row ranges covering 0..n_rows in fixed-size blocks."""
    return [(start, min(start + block, n_rows)) for start in range(0, n_rows, block)]


def map_blocks(func, tasks, workers=None):
    """
    Run ``func(*task)`` for each task and return results in task order.

    The partition never depends on ``workers``, so the assembled output is
    identical for every worker count.

    Args:
        func: Picklable callable
        tasks: List of argument tuples
        workers: Number of processes; 1 runs inline

    Returns:
        List of results, one per task
    """
    workers = workers or default_workers()
    if workers == 1 or len(tasks) <= 1:
        return [func(*task) for task in tasks]
    return Parallel(n_jobs=min(workers, len(tasks)))(delayed(func)(*task) for task in tasks)
