"""Exact formal vector fields, Lie-series flows and product-of-exponentials charts."""
from .flows import FormalDiffeo, compose, exp_field, inverse, pull_back
from .formal_algebra import FormalVectorField, RadialField, banach_norm, bracket, graded_norm
from .factorization import FilteredBasis, FlatBasis, NotInAlgebra, decompose, factorize, reconstruct
from .prolongation import MalgrangeConfig, Obstruction, PDESystem, build_filtered_basis, prolong
from .rational import Q

__version__ = "0.1.0"
