"""PairNet: shallow pairwise networks trained in one shot by least squares.

Two layers of API. The estimator layer (:class:`PairNetRegressor`,
:class:`BackpropMlpRegressor`) follows scikit-learn fit/predict
conventions so the models compose with pipelines and model selection.
The functional layer underneath (network, partition, training, selection,
streaming, dataio, serialize) is what the estimators and the ``pairnet``
command line are built from.
"""

from .estimators import BackpropMlpRegressor, PairNetRegressor

__version__ = "0.1.0"

__all__ = ["PairNetRegressor", "BackpropMlpRegressor", "__version__"]
