"""One-way LOCC state discrimination and quantum error correction toolkit.

Modules
-------
linalg      tolerances and dense complex linear algebra
bipartite   bipartite pure states in operator form, Schmidt data, partial maps
channels    Kraus channels, POVMs, Alice's measurement channel, Bob's recovery
qec         Knill-Laflamme and related correctability tests
opalg       operator systems, *-algebra structure, separating vectors
locc        one-way LOCC deciders, basis finder, obstructions
stabilizer  Pauli arithmetic and the canonical stabilizer-code state sets
cli         command-line interface (``locc-qec``)
"""

__version__ = "0.1.0"

from .errors import *  # noqa: F401,F403
from .linalg import Tolerance, DEFAULT_TOL  # noqa: F401
from .bipartite import BipartiteState, StateSet, max_entangled, from_operator, from_vector  # noqa: F401
from .channels import KrausChannel, Povm  # noqa: F401
from .qec import CodeSpace, kl_check  # noqa: F401
from .locc import Status, Verdict, oneway_algebra_test, verify_protocol  # noqa: F401
