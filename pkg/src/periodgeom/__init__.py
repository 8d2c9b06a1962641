"""Reduction theory, nilpotent orbits and Hodge-norm asymptotics, computed exactly where possible."""
from .linalg import (BackendError, DegenerateFlagError, Filtration, FloatSubspace, Matrix, QQi, Subspace,
                     gram_schmidt, nilpotent_exp, subspace_sum_intersect, wedge_form, wedge_power)
from .mixed_hodge import (GradedSplitting, NilpotentCone, PolarizedLattice, cone_weight_filtrations,
                          deligne_splitting, rational_splitting, weight_filtration)
from .period import (HodgePoint, NilpotentOrbitData, hodge_decomposition, hodge_form, hodge_metric_matrix,
                     orbit_filtration, validate_orbit, wedge_norm_chain)
from .reduction import (HeckeImage, SiegelSetSpec, bs_to_bb, corner_coords, hecke_points, is_reduced, iwasawa,
                        reduce_sl2, siegel_contains, siegel_intersectors)
from .asymptotics import (RaySpec, SigmaRegion, curve_restriction, fit_exponents, predicted_exponents,
                          reducedness_sweep, roughly_monomial_check, sample_sigma)
from .locus import (LocusSystem, hodge_vector_condition, locus_solve, monodromy_shift_check,
                    q_algebraicity_check)
from .io import load_orbit

__version__ = "0.1.0"
