"""gridcep: semantic complex-event processing for dynamic demand response
in a simulated campus microgrid.

Events from sensor streams are lifted into a domain ontology, matched
against two-segment patterns (semantic filter | CEP operator), and
detections drive curtailment actions that feed back into the simulated
loads.
"""

from .errors import GridCepError
from .events import Event, StreamSchema, lift_event, merge_ordered
from .ontology import Iri, Ontology, Triple, load_ontology, parse_ontology_text
from .pattern import parse_pattern, format_pattern, validate
from .runtime import Detection, Engine, coalesce, window_aggregate

__version__ = "0.1.0"

__all__ = [
    "GridCepError", "Event", "StreamSchema", "lift_event", "merge_ordered",
    "Iri", "Ontology", "Triple", "load_ontology", "parse_ontology_text",
    "parse_pattern", "format_pattern", "validate",
    "Detection", "Engine", "coalesce", "window_aggregate", "__version__",
]
