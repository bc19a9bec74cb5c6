"""scenquery: query labeled time-series traces with scenario programs."""

__version__ = "0.1.0"

from .config import BehaviorMap, EngineConfig, GeometryConfig, load_config
from .engine import MatchQuery, MatchResult, backend_info, membership, membership_oracle
from .ihefsm import Ihefsm, compile_program
from .scenic import parse_program, pretty_print, tokenize, try_parse_program
from .search import MatchReport, build_domains, dependency_groups, match_dataset, match_trace
from .traces import (
    Dataset,
    LabeledTrace,
    MapRegion,
    ObjectTrack,
    index_dataset,
    load_dataset,
    load_trace,
    longest_run,
    save_trace,
)

__all__ = [
    "BehaviorMap", "EngineConfig", "GeometryConfig", "load_config",
    "MatchQuery", "MatchResult", "backend_info", "membership", "membership_oracle",
    "Ihefsm", "compile_program",
    "parse_program", "pretty_print", "tokenize", "try_parse_program",
    "MatchReport", "build_domains", "dependency_groups", "match_dataset", "match_trace",
    "Dataset", "LabeledTrace", "MapRegion", "ObjectTrack",
    "index_dataset", "load_dataset", "load_trace", "longest_run", "save_trace",
    "__version__",
]
