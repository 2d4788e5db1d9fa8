"""tiletool: construct and verify translational tilings of the real line.

Constructions: a Banach-contraction solve for displacement amplitudes that
scatter quadratically many points near each integer while freezing the
comb's transform on the unit frequency interval; band-limited
zero-integral functions tiling those sets; and sparse-spectrum
interpolants supported on prescribed unions of intervals.  Verification:
tiling sums with compensated accumulation, density and gap statistics,
distributional pairings, periodic-structure spectra and detection, and an
exact cyclic-group oracle.
"""

from .core import (
    BandlimitedFunction,
    GridFunction,
    PeriodicStructure,
    PointSet,
    SeqWindow,
    SpectrumAtom,
    SpectrumMeasure,
    bump,
    eval_bandlimited,
    make_bandlimited,
    validate_point_set,
)
from .staircase import perturbation, staircase, staircase_ft, staircase_ft_minus_one
from .fixed_point import (
    ContractionError,
    SolveReport,
    build_schwartz_tiler,
    build_translation_set,
    fourier_coefficients,
    residual_norm,
    solve_displacements,
    solve_displacements_auto,
    transform_remainder,
)
from .interpolation import (
    BumpProfile,
    InterpolationSystem,
    OmegaSpec,
    SparseSupportFunction,
    build_system,
    choose_radii,
    place_supports,
    solve_coeffs,
    synthesize_interpolant,
)
from .verify import (
    CyclicInstance,
    DensityReport,
    TilingSumResult,
    cyclic_census,
    cyclic_tiling_check,
    density_report,
    detect_periodic_structure,
    growth_exponent,
    pair_with_test_function,
    periodic_spectrum,
    periodic_tiling_check,
    tiling_sum,
)

__version__ = "0.1.0"
