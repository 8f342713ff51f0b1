from .base import (
    BatchFromSingleMixin,
    CountingSurrogate,
    ExactSurrogate,
    Surrogate,
    SurrogatePrediction,
)
from .mock import DecodeSpec, MockMetaModel, smear_fraction
from .mock_server import MockServer, mock_serve
from .rbfn import RbfnModel, RbfnSurrogate, default_n_centers, rbfn_fit
from .remote import (
    RemoteSurrogate,
    build_request,
    health,
    remote_predict,
    remote_predict_batch,
)
