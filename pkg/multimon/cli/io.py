"""Document loading and output rendering for the command line."""

import json
import logging
from pathlib import Path
from typing import Any, Optional, Type, TypeVar, Union

import numpy as np
from pydantic import BaseModel, ValidationError

from multimon.circuit import get_preset, load_netlist
from multimon.circuit.netlist import Netlist
from multimon.cli.manifest import RunManifest
from multimon.errors import ConfigurationError, DocumentParseError

logger = logging.getLogger(__name__)

ModelT = TypeVar("ModelT", bound=BaseModel)

FORMATS = ("text", "csv", "json")


def resolve_netlist(source: str) -> Netlist:
    """A netlist file path, or a preset name when no such file exists."""
    if Path(source).exists():
        return load_netlist(source)
    try:
        return get_preset(source)
    except ConfigurationError:
        raise DocumentParseError("no such file or preset", path=source)


def load_model(path: Union[str, Path], model: Type[ModelT]) -> ModelT:
    """Read a JSON document into a pydantic model, reporting the failing line or field."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise DocumentParseError(f"cannot read document: {e}", path=str(path))
    try:
        document = json.loads(text)
    except json.JSONDecodeError as e:
        raise DocumentParseError(e.msg, path=str(path), line=e.lineno)
    try:
        return model.model_validate(document)
    except ValidationError as e:
        first = e.errors()[0]
        location = ".".join(str(part) for part in first.get("loc", ()))
        raise DocumentParseError(f"{location}: {first.get('msg')}", path=str(path))
    except DocumentParseError:
        raise
    except ConfigurationError as e:
        raise DocumentParseError(str(e), path=str(path))


def to_jsonable(value: Any) -> Any:
    if isinstance(value, dict):
        return {str(k): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return to_jsonable(value.tolist())
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, complex):
        return {"re": value.real, "im": value.imag}
    if isinstance(value, BaseModel):
        return value.model_dump(mode="json")
    return value


def _text_lines(value: Any, indent: int = 0) -> list:
    pad = "  " * indent
    lines = []
    if isinstance(value, dict):
        for key, item in value.items():
            if isinstance(item, (dict, list)) and item and not _is_flat(item):
                lines.append(f"{pad}{key}:")
                lines.extend(_text_lines(item, indent + 1))
            else:
                lines.append(f"{pad}{key}: {_scalar(item)}")
    elif isinstance(value, list):
        for item in value:
            if isinstance(item, (dict, list)) and not _is_flat(item):
                lines.append(f"{pad}-")
                lines.extend(_text_lines(item, indent + 1))
            else:
                lines.append(f"{pad}- {_scalar(item)}")
    else:
        lines.append(f"{pad}{_scalar(value)}")
    return lines


def _is_flat(value: Any) -> bool:
    return isinstance(value, list) and all(not isinstance(v, (dict, list)) for v in value)


def _scalar(value: Any) -> str:
    if isinstance(value, float):
        return f"{value:.6g}"
    if isinstance(value, list):
        return "[" + ", ".join(_scalar(v) for v in value) + "]"
    return str(value)


def render(document: dict, manifest: RunManifest, fmt: str, csv_text: Optional[str] = None) -> str:
    """
    Render a result document. JSON embeds the manifest under ``manifest``;
    text and CSV carry it as a leading comment line.
    """
    if fmt not in FORMATS:
        raise ConfigurationError(f"Unknown output format {fmt}; choose from {', '.join(FORMATS)}")
    if fmt == "json":
        payload = {"manifest": manifest.model_dump(mode="json", exclude_none=True), **to_jsonable(document)}
        return json.dumps(payload, indent=2, sort_keys=False) + "\n"
    header = "\n".join(manifest.comment_lines()) + "\n"
    if fmt == "csv":
        if csv_text is None:
            raise ConfigurationError(f"{manifest.command} has no CSV output; use text or json")
        return header + csv_text
    return header + "\n".join(_text_lines(to_jsonable(document))) + "\n"


def write_output(text: str, out: Optional[str]) -> None:
    if out is None:
        print(text, end="")
        return
    path = Path(out)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")
    logger.info(f"Wrote {path}")
