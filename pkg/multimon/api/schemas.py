from enum import Enum
from typing import Any, Dict, List, Optional
from uuid import UUID

from pydantic import BaseModel, Field


class JobStatus(str, Enum):
    QUEUED = "queued"
    PROCESSING = "processing"
    COMPLETED = "completed"
    FAILED = "failed"


class JobRequest(BaseModel):
    command: str = Field(..., description="analyze, sweep, optimize, compile or simulate")
    payload: Dict[str, Any] = Field(default_factory=dict, description="Request document of the command")


class JobResponse(BaseModel):
    job_id: UUID
    status: JobStatus
    message: str


class JobStatusResponse(BaseModel):
    job_id: UUID
    command: str
    status: JobStatus
    progress: int = Field(0, ge=0, le=100)
    message: str
    result_url: Optional[str] = None
    ok: Optional[bool] = Field(None, description="False for completed jobs with a negative outcome, e.g. no feasible design")
    created_at: Optional[str] = None


class PendingJob(BaseModel):
    job_id: UUID
    command: str
    status: JobStatus
    created_at: str
    progress: int


class PendingJobsResponse(BaseModel):
    jobs: List[PendingJob]
    total: int


class PresetsResponse(BaseModel):
    presets: List[str]


class ErrorResponse(BaseModel):
    detail: str


class HealthResponse(BaseModel):
    status: str
    version: str
    database: bool
    supported_commands: List[str]
    pending_jobs: int
