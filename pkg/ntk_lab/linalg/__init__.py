from .matrix import as_matrix, frobenius_norm, matrix_mean, pearson_correlation
from .eigen import EigenResult, jacobi_eigen
from .rng import Rng, init_weights, INIT_SCHEMES, InitScheme
