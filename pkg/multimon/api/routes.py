import hashlib
import json
import logging
import os
import uuid
from datetime import datetime

import aiofiles
from fastapi import APIRouter, HTTPException
from fastapi.responses import JSONResponse

from multimon import __version__
from multimon.api.database import job_db
from multimon.api.schemas import (
    HealthResponse,
    JobRequest,
    JobResponse,
    JobStatus,
    JobStatusResponse,
    PendingJob,
    PendingJobsResponse,
    PresetsResponse,
)
from multimon.circuit import list_presets
from multimon.config.settings import SUPPORTED_COMMANDS
from multimon.errors import MultimonError
from multimon.services.commands import validate_request

logger = logging.getLogger(__name__)

router = APIRouter()


def payload_hash(command: str, payload: dict) -> str:
    """SHA256 of the command name and its canonical JSON payload."""
    canonical = json.dumps(payload, sort_keys=True, separators=(",", ":"), default=str)
    return hashlib.sha256(f"{command}\n{canonical}".encode("utf-8")).hexdigest()


@router.post("/jobs", response_model=JobResponse)
async def submit_job(request: JobRequest):
    """
    Queue a command for the worker pool.

    The payload is validated up front; an identical request that already
    completed returns the earlier job instead of queuing a new one.
    """
    if request.command not in SUPPORTED_COMMANDS:
        raise HTTPException(
            status_code=422,
            detail=f"Unsupported command. Supported: {', '.join(SUPPORTED_COMMANDS)}"
        )
    try:
        validate_request(request.command, dict(request.payload))
    except MultimonError as e:
        raise HTTPException(status_code=422, detail=str(e))

    digest = payload_hash(request.command, request.payload)
    try:
        cached_job = await job_db.get_job_by_hash(digest)
        if cached_job and cached_job.get('result_path') and os.path.exists(cached_job['result_path']):
            logger.info(f"Cache hit for {digest[:8]}")
            return JobResponse(
                job_id=uuid.UUID(cached_job['id']),
                status=JobStatus.COMPLETED,
                message='Using cached result'
            )

        job_id = uuid.uuid4()
        await job_db.create_job(
            str(job_id),
            {
                'command': request.command,
                'payload': json.dumps(request.payload),
                'status': JobStatus.QUEUED.value,
                'message': 'Queued',
                'progress': 0,
                'payload_hash': digest,
            }
        )
    except Exception as e:
        logger.error(f"Submit error: {e}")
        raise HTTPException(status_code=500, detail=f"Internal server error: {str(e)}")

    logger.info(f"Queued {request.command} job {job_id}")
    return JobResponse(job_id=job_id, status=JobStatus.QUEUED, message='Queued')


@router.get("/jobs/pending", response_model=PendingJobsResponse)
async def get_pending_jobs():
    """Jobs that are queued or running."""
    try:
        db_jobs = await job_db.get_pending_jobs()
    except Exception as e:
        logger.error(f"Error getting pending jobs: {e}")
        raise HTTPException(status_code=500, detail=f"Error retrieving jobs: {str(e)}")

    jobs = [
        PendingJob(
            job_id=uuid.UUID(row['id']),
            command=row['command'],
            status=row['status'],
            created_at=str(datetime.fromtimestamp(row['created_at'])),
            progress=row.get('progress') or 0,
        )
        for row in db_jobs
    ]
    return PendingJobsResponse(jobs=jobs, total=len(jobs))


@router.get("/jobs/{job_id}", response_model=JobStatusResponse)
async def get_job_status(job_id: uuid.UUID):
    job = await job_db.get_job(str(job_id))
    if not job:
        raise HTTPException(status_code=404, detail=f"Job {job_id} not found")

    response = JobStatusResponse(
        job_id=job_id,
        command=job['command'],
        status=job['status'],
        progress=job.get('progress') or 0,
        message=job.get('message') or '',
        created_at=str(datetime.fromtimestamp(job['created_at'])),
    )
    if job['status'] == JobStatus.COMPLETED.value:
        response.result_url = f"/api/v1/jobs/{job_id}/result"
        response.ok = bool(job.get('ok', 1))
    return response


@router.get("/jobs/{job_id}/result")
async def get_job_result(job_id: uuid.UUID):
    """Result document of a completed job."""
    job = await job_db.get_job(str(job_id))
    if not job:
        raise HTTPException(status_code=404, detail=f"Job {job_id} not found")
    if job['status'] != JobStatus.COMPLETED.value:
        raise HTTPException(status_code=400, detail="Job not completed yet")

    result_path = job.get('result_path')
    if not result_path or not os.path.exists(result_path):
        raise HTTPException(status_code=404, detail="Result file not found")

    async with aiofiles.open(result_path, 'r', encoding='utf-8') as f:
        content = await f.read()
    return JSONResponse(content=json.loads(content))


@router.get("/queue/stats")
async def get_queue_statistics():
    try:
        stats = await job_db.get_queue_statistics()
        return {"status": "success", "statistics": stats}
    except Exception as e:
        logger.error(f"Error getting queue statistics: {e}")
        raise HTTPException(status_code=500, detail=f"Error retrieving queue statistics: {str(e)}")


@router.get("/presets", response_model=PresetsResponse)
async def get_presets():
    return PresetsResponse(presets=list_presets())


@router.get("/health", response_model=HealthResponse)
async def health_check():
    health_status = {
        "status": "healthy",
        "version": __version__,
        "database": False,
        "supported_commands": SUPPORTED_COMMANDS,
        "pending_jobs": 0,
    }
    try:
        pending_jobs = await job_db.get_pending_jobs()
        health_status["database"] = True
        health_status["pending_jobs"] = len(pending_jobs)
    except Exception as e:
        logger.error(f"Database check failed: {e}")
        health_status["status"] = "degraded"
    return HealthResponse(**health_status)
