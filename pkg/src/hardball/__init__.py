"""Critical configurations of hard spheres packed in a rectangular box.

The building blocks are the tautological function ``tau`` (the largest
radius a configuration admits), its Farkas-type regular/balanced
classification, an ascending flow, the explicit critical chains with their
witness cycles, exact Betti bookkeeping and a probabilistic roadmap.
"""

from .exceptions import (AmbiguousClassificationError, DegenerateGradientError, DegenerateSampleError,
                         DomainViolationError, GeodesicAmbiguityError, HardballError, InsufficientDataError,
                         IterationCapError, LPNumericError, NonUniquenessError, ParameterError,
                         PartialRetractionError, PreconditionError)
from .flow import FlowOptions, RetractionReport, Trajectory, ascend, crossing_time, retract_level, retraction_homotopy
from .geometry import BoxDomain, Configuration, Face, in_conf, min_gap, wall_distances
from .roadmap import Roadmap, build_roadmap, connectivity_experiment, local_plan, radius_sweep, sample_configuration
from .stress import (AscentCertificate, Balanced, BalanceCertificate, Regular, StressGraph, ascent_direction,
                     balance_weights, build_stress_graph, check_balance, classify, hull_checks)
from .taut import ActiveSet, PairConstraint, WallConstraint, active_set, constraint_gradient, gradient_matrix, tau
from .topo import BettiTables, PoincarePolynomial, betti_across_threshold, harmonic, k_multiplicity, poincare_conf
from .witness import (ChainSpec, IntersectionWitness, SphereSample, chain_configuration, chain_distance,
                      intersection_witness, r_star, retract_chain, sample_S_epsilon, sigma_membership,
                      tangent_rank)

__version__ = "0.1.0"
