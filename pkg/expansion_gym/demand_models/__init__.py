from .features import FeatureSpec, Standardizer, build_features
from .model import DemandModel, predict_site, predict_network, affine_form, kernel_matrix
from .model import FAMILIES, HYPERPARAMETERS
from .ols import fit_ols
from .svr import fit_svr, solve_svr_dual, dual_objective
from .fitting import fit_model
