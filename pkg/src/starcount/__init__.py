"""Counting lattice points in hyperbolic regions and the sums built from them."""

__version__ = "0.1.0"

from .errors import CapabilityError, DomainError, InternalError, SingularTermError, StarcountError
from .scalar import clamped_log, geo_mean, nearest_int_distance
from .lattice import (LatticeBasis, assemble_lattice, exact_successive_minima, support_monotone_basis,
                      support_monotone_transform, support_triangular_permutation)
from .tessellation import SlabDomainH2, StarBodyH1, cube_scaling, partition_h1, star_member, tessellate_h2
from .counting import (CountQuery, RangeConfig, brute_count_M, count_M, count_N, range_split, sum_S,
                       sum_S_star, sum_Sigma, tile_count_M)
from .certify import PhiSpec, certify_phi, estimate_c_alpha, min_weighted_product
from .weights import SupportMatrix, build_schedule, verify_identities
from .bounds import BoundQuery, dyadic_sigma_chain, lower_bound, rhs_main_theorem, rhs_sigma_theorem
from .schmidt import cover_prefix, dyadic_family, exceptional_set_estimate, moment_sum_check
