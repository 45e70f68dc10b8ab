"""Numerical curvature engine and Ricci-soliton residual checker for Finsler
(especially Randers) metrics, built on exact forward-mode jet differentiation.
"""

from . import (finsler, fixtures, generators, jets, randers, reports,
               riemann, sampling, solitons, suites)
from .finsler import (CurvatureBundle, FinslerMetric, FlagCurvature,
                      FlagDomainError, Measure, ParameterError)
from .jets import EvaluationError, FlagPoint, Jet, fd_derivative, lift
from .randers import (NavigationData, NavigationDomainError, RandersData,
                      RandersDomainError)
from .reports import ResidualReport
from .riemann import (MetricDomainError, RiemannMetric, ScalarField,
                      VectorField)

__version__ = "0.1.0"
