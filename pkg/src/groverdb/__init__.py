"""Grover search over a programmable quantum database, and discrimination
of Grover states when the database size is uncertain."""

from .statevec import HermitianOperator, Povm, StateVector, inner, apply, inv_sqrt_on_support, sample
from .grover import GroverParams, MarkedSet, params, run, grover_state, success_prob
from .qdb import Database, FieldSpec, QueryTask, SearchOutcome, build, search, classical_search
from .discrim import SweepRow, sweep, unamb_bound, minerr_prob, minerr_numeric, crossing_points

__version__ = "0.1.0"
