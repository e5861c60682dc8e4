"""Quantitative recurrence toolkit.

Bowen metrics, return times and shift-function profiles; separated-net
estimators for box dimension and topological entropy plus the growth-rate
comparisons; periodic-anchor machinery (critical neighborhoods,
approximation constants, closing-property falsifiers); and three worked
systems: torus rotations with exact continued-fraction arithmetic, the full
Bernoulli shift with an aperiodic-word search, and the hyperbolic plane with
a metric closing-lemma checker.
"""

from ._kernels import BACKEND
from .core import (UNRESOLVED, AperiodicityVerdict, DynamicalSystem,
                   HOLDS_ON_WINDOW, INCONCLUSIVE, MapSystem, OrbitWindow,
                   QuantileTable, ShiftProfile, VIOLATED, bowen_distance,
                   geometric_grid, is_F_aperiodic, is_resolved, quantile_left,
                   quantile_right, return_time, shift_function, shift_profile)
from .complexity import (GrowthRateEstimate, SeparatedNet,
                         box_dimension_estimate, growth_rate_F, growth_rate_G,
                         maximal_separated_net, topological_entropy_estimate)
from .periodic import (ApproximationRecord, ClosingFunction, ClosingReport,
                       PeriodicPoint, StrongClosingFunction,
                       approximation_constant, check_delta_closing,
                       check_strong_delta_closing, classify_bounded,
                       critical_radius, hurwitz_estimate,
                       in_critical_neighborhood, penetration_length)
from .torus import (ContinuedFraction, TorusRotation,
                    badly_approximable_constant, generate_bad_alpha,
                    torus_closing_witness, torus_distance,
                    uniform_approximation_floor,
                    verify_classical_da_equivalence)
from .bernoulli import (AperiodicityCertificate, BernoulliShift, SymbolWord,
                        is_phi_aperiodic, periodic_closing_witness,
                        phi_aperiodic_search, verify_periodic_distance_equivalence, word_distance)
from .hyperbolic import (DELTA0, CyclicQuotientGeodesic, GeodesicLine,
                         HPoint, Isometry, axis, closing_lemma_check,
                         dist_to_geodesic, displacement_bounds_check,
                         geodesic_penetration, hyp_distance,
                         neighbor_containment_check, orbital_counting,
                         translation_length)

__version__ = "0.1.0"
