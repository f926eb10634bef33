from .metrics import rmse, mape
from .cv import CvPlan, CvResult, cross_validate
from .grid import Grid, GridSearchResult, grid_search
from .selection import Selection, resolve_feature_spec, search_families, select_model, refit, cv_table
from .selection import FEATURE_POLICIES
