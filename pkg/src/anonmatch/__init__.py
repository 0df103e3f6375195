"""Self-stabilizing maximal matching and link naming on anonymous networks."""

from .composed import ComposedState, RewrittenMatchingEngine, run_composed
from .daemon import DaemonPolicy, ReplayError, make_policy
from .harness import SweepConfig, TrialError, TrialSpec, TrialStats, inject_faults, run_trial, sweep
from .linkname import LinkNameEngine, guard_R0_holds, is_stable_A2
from .matching import MatchingEngine, Rule, interpret_beta
from .registers import RegisterFile
from .topology import NDEF, AnonymousGraph, GraphError, build_graph, generate, load_graph, parse_graph
from .trace import ExecutionTrace, TraceEvent

__version__ = "0.1.0"
