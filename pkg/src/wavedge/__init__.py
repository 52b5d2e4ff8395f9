"""Sparse-scale wavelet modulus-maxima edge detection.

Modules: ``core`` (signals, images, scale schedules, rasters), ``cwt``
(wavelet transforms), ``modmax`` (modulus maxima and boundary curves),
``filtering`` (decision function, maxima-line tracking, edge-focusing
oracle and audit), ``patterns`` (model-edge laboratory), ``detector``
(edge maps and the Canny baseline) and ``evaluation`` (phantoms, figure
of merit, experiment drivers).
"""
from .core import ScaleSchedule, as_image, as_signal, extract_row, load_raster, write_raster
from .cwt import PSI_NORM, WaveletPlane1D, WaveletPlane2D, cwt1d, cwt1d_rows, cwt2d
from .modmax import BoundaryCurve, MaximaSet, ModMax, chain_curves, detect1d, detect2d
from .filtering import (
    ConnectionReport,
    DecisionParams,
    MaximaLine,
    ScaleLinks,
    audit,
    connect,
    decision_1d,
    decision_2d,
    edge_focusing_oracle,
    filter_links,
    filter_schedule,
    oracle_links,
)
from .patterns import (
    CriticalValues,
    PatternSpec,
    analytic_wt,
    critical_amplitude,
    critical_scale,
    find_modmax,
    level_curve,
    q_surface,
    q_values,
    synthesize,
)
from .detector import DetectorParams, EdgeMap, canny_baseline, curve_score, detect_1d, detect_2d, relevance
from .evaluation import FomParams, PhantomSpec, benchmark_phantom, fom, generate_phantom, run_table_experiment

__version__ = "0.1.0"
