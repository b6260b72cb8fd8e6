"""bpscope: trainability analysis for circuits built from local 2-design blocks.

Exact derivative variances via backward channel propagation, analytic lower
bounds from circuit geometry, and desk-scale VQE experiments on the
field-generalized toric code.
"""

from .ansatz import AnsatzSpec, BuiltAnsatz, build, cartan_block, diff_param_index
from .bounds import BoundReport, ladder_bound, theorem1_bound, theorem2_bound
from .circuit import Block, Circuit, Gate, circuit_from_json, circuit_to_json
from .geometry import Path, PathSet, exponent, find_path_set
from .models import (Hamiltonian, ToricLattice, area_law_check,
                     area_law_check_state, entanglement_entropy, ground_energy,
                     ground_state, topological_entropy, toric_code)
from .pauli import PauliString
from .simulator import (StateVector, expectation, gradient, haar_unitary,
                        mc_variance, run, run_haar)
from .twirl import (SupportDistribution, differential_step, exact_term_variance,
                    exact_variance, twirl_step)

__version__ = "0.1.0"
