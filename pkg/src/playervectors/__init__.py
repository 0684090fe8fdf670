"""Player vectors: per-match football playing-style vectors from action heatmaps."""
from .config import Config
from .heatmap import GridSpec, build_heatmap
from .nmf import FactorModel, NMFOptions, nmf_fit, nmf_transform
from .positions import PositionModel, cluster_positions, select_k, silhouette_mean
from .similarity import SeasonPopulation, build_report, manhattan, most_similar, similarity_percent
from .styles import StyleCatalog, assign_style, fit_styles
from .vectors import DEFAULT_SLOTS, PlayerMatchVector, VectorLayout, season_vector

__version__ = "0.1.0"

__all__ = [
    "Config", "GridSpec", "build_heatmap", "FactorModel", "NMFOptions", "nmf_fit", "nmf_transform",
    "PositionModel", "cluster_positions", "select_k", "silhouette_mean", "SeasonPopulation",
    "build_report", "manhattan", "most_similar", "similarity_percent", "StyleCatalog",
    "assign_style", "fit_styles", "DEFAULT_SLOTS", "PlayerMatchVector", "VectorLayout",
    "season_vector",
]
