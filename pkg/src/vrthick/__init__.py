"""Metric thickenings of Vietoris-Rips and Čech complexes under the 1-Wasserstein metric."""

from .complexes import NON_STRICT, STRICT, Filtration, SimplicialComplex, cech_complex, vr_complex, vr_filtration
from .errors import VRTError
from .metric import FiniteMetricSpace, PointCloud, build_space, gh_distance_exact, space_from_matrix
from .persistence import PersistenceDiagram, bottleneck, compute_ph
from .sphere import critical_scale, karcher_mean, predicted_betti
from .thickening import Thickening, contains, distance, distance_to_base
from .transport import FiniteMeasure, dirac, measure, wasserstein

__version__ = "0.1.0"

__all__ = [
    "NON_STRICT", "STRICT", "Filtration", "SimplicialComplex", "cech_complex", "vr_complex", "vr_filtration",
    "VRTError", "FiniteMetricSpace", "PointCloud", "build_space", "gh_distance_exact", "space_from_matrix",
    "PersistenceDiagram", "bottleneck", "compute_ph", "critical_scale", "karcher_mean", "predicted_betti",
    "Thickening", "contains", "distance", "distance_to_base", "FiniteMeasure", "dirac", "measure", "wasserstein",
]
