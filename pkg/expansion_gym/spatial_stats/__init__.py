from .moran import MoranResult, morans_i, morans_test_analytic, morans_test_permutation, residual_moran
from .moran import moran_table, autocorrelation_inherited
