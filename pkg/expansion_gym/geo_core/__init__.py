from .network import Site, Network, distance_matrix, weight_matrix, spatial_lag
from .network import DISTANCE_METRICS, SITE_STATUS
