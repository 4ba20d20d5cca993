import logging
import os

from fastapi import FastAPI
from fastapi.middleware.cors import CORSMiddleware

from multimon import __version__
from multimon.api.database import job_db
from multimon.api.routes import router
from multimon.config.settings import (
    POLL_INTERVAL, RESULTS_DIR, STALE_CHECK_INTERVAL, STALE_TIMEOUT, WORKER_COUNT,
)
from multimon.services.queue_worker import QueueWorkerPool

logger = logging.getLogger(__name__)

app = FastAPI(
    title="Multimon Toolkit",
    description="Circuit analysis, design and pulse-level simulation jobs for multimon devices",
    version=__version__
)

app.add_middleware(
    CORSMiddleware,
    allow_origins=["*"],
    allow_credentials=True,
    allow_methods=["*"],
    allow_headers=["*"],
)

app.include_router(router, prefix="/api/v1")

worker_pool = None


@app.on_event("startup")
async def startup_event():
    global worker_pool

    os.makedirs(os.path.dirname(os.path.abspath(job_db.db_path)), exist_ok=True)
    os.makedirs(RESULTS_DIR, exist_ok=True)
    await job_db.init_db()

    interrupted = await job_db.fail_interrupted_jobs()
    if interrupted > 0:
        logger.info(f"Failed {interrupted} jobs interrupted by the previous run")

    worker_pool = QueueWorkerPool(
        db_manager=job_db,
        num_workers=WORKER_COUNT,
        results_dir=RESULTS_DIR,
        poll_interval=POLL_INTERVAL,
        stale_timeout=STALE_TIMEOUT,
        stale_check_interval=STALE_CHECK_INTERVAL,
    )
    try:
        await worker_pool.start()
        logger.info("Worker pool started")
    except Exception as e:
        logger.error(f"Failed to start worker pool: {e}")
        raise


@app.on_event("shutdown")
async def shutdown_event():
    global worker_pool

    if worker_pool:
        logger.info("Stopping worker pool...")
        try:
            await worker_pool.stop()
        except Exception as e:
            logger.error(f"Error while stopping worker pool: {e}")
        worker_pool = None


@app.get("/")
async def root():
    return {
        "service": "Multimon Toolkit",
        "version": __version__,
        "docs": "/docs"
    }
