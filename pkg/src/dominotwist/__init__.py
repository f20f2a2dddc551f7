"""Exact enumeration, sampling, and statistics of 3D domino tilings of
cylinders over a quadriculated disk."""

from .algebra import LaurentPoly, PlugMatrix, evaluate, mat_apply, poly_mul
from .dynamics import (
    ComponentReport,
    FloorTable,
    MoveGraph,
    components,
    enumerate_tilings,
    fat_thin_census,
    flip_neighbors,
    floor_table,
    move_graph,
    tiling_from_dominoes,
    trit_neighbors,
)
from .plugfloor import (
    Floor,
    Plug,
    PlugTable,
    Tiling,
    count_floor_tilings,
    enumerate_floor_tilings,
    enumerate_plugs,
    plug_table,
)
from .region import Cell, Disk, parse_disk, rectangle, reflect_disk, render_disk
from .stats import (
    SamplerState,
    SpectralReport,
    cdf_sup_gap,
    eta_curve,
    gaussian_constants,
    mod_uniformity,
    perron,
    plug_marginal,
    sample_tiling,
    sampler_state,
    spectral_report,
    twist_moments,
)
from .transfer import (
    TransferSystem,
    build_transfer,
    count_cork,
    count_cylinder,
    strict_contraction_report,
    twist_polynomial,
)
from .twist import (
    DEFAULT_KERNEL,
    CalibrationReport,
    Domino3,
    FloorCocycle,
    TwistKernel,
    calibrate,
    floor_cocycle,
    kernel_candidates,
    make_connector_cocycle,
    make_kernel_cocycle,
    pair_interaction,
    tiling_twist,
    vertical_tiling,
)

__version__ = "0.1.0"
