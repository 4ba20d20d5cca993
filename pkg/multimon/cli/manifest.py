"""Run manifest embedded in every CLI output."""

from datetime import datetime, timezone
from typing import Any, Dict, List, Optional

from pydantic import BaseModel, Field

from multimon import __version__


class RunManifest(BaseModel):
    command: str = Field(..., description="Subcommand that produced the output")
    inputs: List[str] = Field(default_factory=list, description="Input paths or preset names")
    config: Dict[str, Any] = Field(default_factory=dict, description="Resolved options")
    version: str = Field(__version__, description="Toolkit version")
    seed: Optional[int] = Field(None, description="Random seed, when the command draws random numbers")
    created_at: Optional[str] = Field(None, description="UTC timestamp; omitted for reproducible runs")

    def comment_lines(self) -> List[str]:
        """The manifest as '#'-prefixed lines for text and CSV outputs."""
        return [f"# multimon {self.command} {self.model_dump_json(exclude_none=True)}"]


def build_manifest(
    command: str,
    inputs: List[str],
    config: Dict[str, Any],
    seed: Optional[int] = None,
    reproducible: bool = False,
) -> RunManifest:
    timestamp = None if reproducible else datetime.now(timezone.utc).isoformat(timespec="seconds")
    return RunManifest(command=command, inputs=inputs, config=config, seed=seed, created_at=timestamp)
