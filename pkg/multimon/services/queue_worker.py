"""
Background workers draining the SQLite job queue.

Commands are CPU-bound numerics, so each one runs in a shared thread pool
while the worker coroutine keeps polling and updating the job row.
"""

import asyncio
import json
import logging
import os
import traceback
from concurrent.futures import ThreadPoolExecutor
from typing import Any, Dict, Optional

import aiofiles

from multimon.api.database import JobDatabase
from multimon.cli.io import to_jsonable
from multimon.config.settings import RESULTS_DIR, WORKER_COUNT
from multimon.errors import MultimonError
from multimon.services.commands import CommandOutput, run_command

logger = logging.getLogger(__name__)

executor = ThreadPoolExecutor(max_workers=max(WORKER_COUNT, 1))


async def async_run_command(command: str, payload: dict) -> CommandOutput:
    loop = asyncio.get_running_loop()
    return await loop.run_in_executor(executor, run_command, command, payload)


async def write_result(result_path: str, output: CommandOutput) -> str:
    document = dict(output.document)
    if output.csv_text is not None:
        document["csv"] = output.csv_text
    async with aiofiles.open(result_path, 'w', encoding='utf-8') as f:
        await f.write(json.dumps(to_jsonable(document), indent=2))
    return result_path


class QueueWorker:
    """Claims jobs one at a time and stores their result documents."""

    def __init__(self,
                 worker_id: str,
                 db_manager: JobDatabase,
                 results_dir: str = RESULTS_DIR,
                 poll_interval: float = 1.0):
        self.worker_id = worker_id
        self.db = db_manager
        self.results_dir = results_dir
        self.poll_interval = poll_interval
        self.running = False
        self.current_job_id: Optional[str] = None

    async def start(self):
        self.running = True
        logger.info(f"Worker {self.worker_id} started")

        try:
            while self.running:
                try:
                    job = await self.db.claim_next_job(self.worker_id)
                    if job:
                        self.current_job_id = job['id']
                        await self.process_job(job)
                        self.current_job_id = None
                    else:
                        await asyncio.sleep(self.poll_interval)
                except Exception as e:
                    logger.error(f"Error in worker loop {self.worker_id}: {e}")
                    await asyncio.sleep(self.poll_interval)
        except asyncio.CancelledError:
            logger.info(f"Worker {self.worker_id} stopped")
            raise

    async def stop(self):
        self.running = False
        if self.current_job_id:
            await self.db.update_job(
                self.current_job_id,
                {'status': 'queued', 'worker_id': None, 'processing_started': None}
            )

    async def process_job(self, job: Dict[str, Any]):
        """Run one claimed job and record its outcome."""
        job_id = job['id']
        command = job['command']
        logger.info(f"Worker {self.worker_id} processing {command} job {job_id}")

        try:
            payload = json.loads(job['payload'] or '{}')
            await self.db.update_job(job_id, {'progress': 10, 'message': f'Running {command}'})

            output = await async_run_command(command, payload)

            os.makedirs(self.results_dir, exist_ok=True)
            result_path = await write_result(os.path.join(self.results_dir, f"{job_id}.json"), output)

            await self.db.update_job(
                job_id,
                {
                    'status': 'completed',
                    'result_path': result_path,
                    'progress': 100,
                    'ok': int(output.ok),
                    'message': 'Completed' if output.ok else 'Completed without a feasible result',
                }
            )
            logger.info(f"Job {job_id} completed by {self.worker_id}")

        except MultimonError as e:
            logger.warning(f"Job {job_id} failed: {e}")
            await self.db.update_job(job_id, {'status': 'failed', 'message': str(e), 'progress': 0})
        except Exception as e:
            logger.error(f"Error in job {job_id}: {e}")
            logger.error(traceback.format_exc())
            await self.db.update_job(
                job_id,
                {'status': 'failed', 'message': f"Internal error: {str(e)}", 'progress': 0}
            )


class QueueWorkerPool:
    """Worker coroutines plus one periodic stale-job sweeper."""

    def __init__(self,
                 db_manager: JobDatabase,
                 num_workers: int = WORKER_COUNT,
                 results_dir: str = RESULTS_DIR,
                 poll_interval: float = 1.0,
                 stale_timeout: int = 3600,
                 stale_check_interval: int = 60):
        self.db = db_manager
        self.num_workers = num_workers
        self.results_dir = results_dir
        self.poll_interval = poll_interval
        self.stale_timeout = stale_timeout
        self.stale_check_interval = stale_check_interval

        self.workers = []
        self.worker_tasks = []
        self.stale_task = None
        self.running = False

    async def start(self):
        self.running = True
        for i in range(self.num_workers):
            worker = QueueWorker(
                worker_id=f"worker_{i + 1}",
                db_manager=self.db,
                results_dir=self.results_dir,
                poll_interval=self.poll_interval,
            )
            self.workers.append(worker)
            self.worker_tasks.append(asyncio.create_task(worker.start()))

        self.stale_task = asyncio.create_task(self._release_stale_jobs())
        logger.info(f"Started pool of {self.num_workers} workers")

    async def stop(self):
        self.running = False
        for worker in self.workers:
            await worker.stop()
        for task in self.worker_tasks:
            task.cancel()
        if self.stale_task:
            self.stale_task.cancel()
        await asyncio.gather(*self.worker_tasks, *([self.stale_task] if self.stale_task else []),
                             return_exceptions=True)
        logger.info("Worker pool stopped")

    async def _release_stale_jobs(self):
        while self.running:
            try:
                released = await self.db.release_stale_jobs(self.stale_timeout)
                if released > 0:
                    logger.info(f"Released {released} stale jobs")
            except Exception as e:
                logger.error(f"Error releasing stale jobs: {e}")
            await asyncio.sleep(self.stale_check_interval)
