"""Kernel methods with Tikhonov and manifold regularization, and the spectral graph theory behind them."""
from manireg._backend import BACKEND
from manireg.graph import (
    DataGraph,
    Laplacian,
    build_epsilon_graph,
    build_gaussian_graph,
    build_knn_graph,
    connected_components,
    heat_kernel,
    laplacian,
    quadratic_form,
)
from manireg.kernels import (
    Exponential,
    Gaussian,
    Linear,
    Min,
    Polynomial,
    combine_kernels,
    eval_kernel,
    gram_matrix,
    kernel_distance,
)
from manireg.learn import (
    KernelModel,
    SemiSupervisedDataset,
    SolverConfig,
    classify,
    fit_kernel_logistic,
    fit_lap_rls,
    fit_lap_svm,
    fit_rls,
    fit_svm,
    predict,
)
from manireg.spectral import (
    check_interlacing,
    cheeger_constant_bruteforce,
    complement_spectrum,
    eigenvalue_bounds,
    rayleigh_lambda2,
    spectrum,
    sweep_cut,
)

__version__ = "0.1.0"
