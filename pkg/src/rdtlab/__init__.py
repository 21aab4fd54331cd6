"""State-vector simulation of relative diffusion transforms and the speed-up constructions built on them."""
from .amplify import SubspaceChain, TraceRecord, build_prefix_chain, nested_amplify, predicted_amplitude
from .automaton import RuleTable, intermediate_product, iterate, step, verifier
from .diffusion import Subspace, average_amplitude, diffuse, diffusion_matrix, rdt
from .hybrid import OraclePair, divergence_trace, perturb
from .pipeline import PipelineConfig, advance, inject_target, optimal_t1, prepare_x0, run_pipeline
from .search import (
    Bijection,
    MarkedSet,
    grover,
    grover_iterations,
    invert_function,
    solve_unique,
    theorem1_compute,
    theorem1_cost,
)
from .state import (
    Alphabet,
    InvariantViolation,
    distance,
    inner,
    make_basis_state,
    observe,
    rotate_marked,
    walsh_hadamard,
)

__version__ = "0.1.0"
