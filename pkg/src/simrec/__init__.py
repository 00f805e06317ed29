"""Simile recognition via cyclic multitask learning.

A shared Bi-LSTM encoder feeds three heads: a local-attention sentence
classifier, a CRF span extractor, and a bidirectional language-model
decoder.  The heads are chained in a loop so each one's output becomes the
next one's input, and the whole thing trains under a weighted joint loss
on a small numpy autodiff core.
"""

from .tensor import Tensor, backward
from .params import ParamStore, save_checkpoint, load_checkpoint
from .gradcheck import grad_check

__version__ = "0.1.0"

__all__ = [
    "Tensor",
    "backward",
    "ParamStore",
    "save_checkpoint",
    "load_checkpoint",
    "grad_check",
]
