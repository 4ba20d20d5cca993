"""
Lumped-element netlist model and its JSON document format.

Document keys: ``nodes``, ``branches`` (``i, j, ej_ghz, l_nh, c_ff``),
``ground_caps_ff``, ``flux_phi0``.
"""

import json
import logging
from pathlib import Path
from typing import List, Optional, Tuple, Union

import networkx as nx
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from multimon.config.settings import solver_settings
from multimon.errors import ConfigurationError, NetlistParseError

logger = logging.getLogger(__name__)


class Branch(BaseModel):
    """One element group between two nodes: junction, inductor and capacitor in parallel."""

    model_config = ConfigDict(frozen=True)

    i: int = Field(..., ge=0, description="First node index")
    j: int = Field(..., ge=0, description="Second node index")
    ej_ghz: float = Field(0.0, ge=0.0, description="Josephson energy E_J/h in GHz")
    l_nh: Optional[float] = Field(None, gt=0.0, description="Linear inductance in nH")
    c_ff: float = Field(0.0, ge=0.0, description="Branch capacitance in fF")

    @property
    def is_junction(self) -> bool:
        return self.ej_ghz > 0.0

    @property
    def is_inductive(self) -> bool:
        return self.ej_ghz > 0.0 or self.l_nh is not None

    @property
    def pair(self) -> Tuple[int, int]:
        return (min(self.i, self.j), max(self.i, self.j))


class Netlist(BaseModel):
    """Circuit description: nodes, parallel branches, ground capacitors and loop flux."""

    model_config = ConfigDict(frozen=True)

    nodes: int = Field(..., ge=2, description="Number of circuit nodes N")
    branches: List[Branch] = Field(default_factory=list, description="Branch records")
    ground_caps_ff: List[float] = Field(..., description="Capacitance of every node to ground in fF")
    flux_phi0: float = Field(0.0, description="External flux through the ring loop in units of Phi0")

    @model_validator(mode="after")
    def _check_invariants(self) -> "Netlist":
        seen = set()
        for index, branch in enumerate(self.branches):
            if branch.i == branch.j:
                raise ConfigurationError(f"Branch {index} connects node {branch.i} to itself", node=branch.i)
            if branch.i >= self.nodes or branch.j >= self.nodes:
                raise ConfigurationError(f"Branch {index} references a node outside 0..{self.nodes - 1}")
            if branch.pair in seen:
                raise ConfigurationError(f"Duplicate branch between nodes {branch.pair}")
            seen.add(branch.pair)

        if len(self.ground_caps_ff) != self.nodes:
            raise ConfigurationError(
                f"ground_caps_ff has {len(self.ground_caps_ff)} entries, expected {self.nodes}"
            )
        for node, cap in enumerate(self.ground_caps_ff):
            if cap < 0:
                raise ConfigurationError(f"Negative ground capacitance at node {node}", node=node)

        if abs(self.flux_phi0) > solver_settings.quarter_flux:
            logger.warning(
                f"External flux {self.flux_phi0:+.3f} Phi0 exceeds a quarter flux quantum; "
                f"phase slips are not modelled"
            )
        return self

    @property
    def junctions(self) -> List[Branch]:
        return [b for b in self.branches if b.is_junction]

    @property
    def inductive_branches(self) -> List[Branch]:
        """Branches entering the inductive-energy matrix, in document order."""
        return [b for b in self.branches if b.is_inductive]

    def inductive_graph(self) -> nx.Graph:
        graph = nx.Graph()
        graph.add_nodes_from(range(self.nodes))
        for index, branch in enumerate(self.inductive_branches):
            graph.add_edge(branch.i, branch.j, index=index)
        return graph

    def ring_order(self) -> Optional[List[int]]:
        """
        Node sequence around the loop if the inductive graph is a single cycle
        through every node, else None.
        """
        graph = self.inductive_graph()
        if graph.number_of_edges() != self.nodes or not nx.is_connected(graph):
            return None
        if any(degree != 2 for _, degree in graph.degree()):
            return None
        cycle = nx.find_cycle(graph, source=0)
        return [edge[0] for edge in cycle]

    def with_flux(self, flux_phi0: float) -> "Netlist":
        return self.model_copy(update={"flux_phi0": float(flux_phi0)})

    def to_document(self) -> dict:
        return self.model_dump(mode="json")

    def to_json(self, path: Union[str, Path, None] = None, indent: int = 2) -> str:
        text = json.dumps(self.to_document(), indent=indent)
        if path is not None:
            Path(path).write_text(text + "\n", encoding="utf-8")
        return text


def load_netlist(path: Union[str, Path]) -> Netlist:
    """
    Read a netlist document.

    Raises:
        NetlistParseError: unreadable file, malformed JSON (with line number) or invalid fields
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise NetlistParseError(f"cannot read netlist: {e}", path=str(path))
    return parse_netlist(text, source=str(path))


def parse_netlist(text: str, source: Optional[str] = None) -> Netlist:
    try:
        document = json.loads(text)
    except json.JSONDecodeError as e:
        raise NetlistParseError(e.msg, path=source or "<netlist>", line=e.lineno)
    try:
        return Netlist.model_validate(document)
    except ValidationError as e:
        first = e.errors()[0]
        location = ".".join(str(part) for part in first.get("loc", ()))
        raise NetlistParseError(f"{location}: {first.get('msg')}", path=source or "<netlist>")
    except NetlistParseError:
        raise
    except ConfigurationError as e:
        raise NetlistParseError(str(e), path=source or "<netlist>")
