"""Deeply supervised semantic edge detection at desk scale.

Subpackages: a micro tensor/autodiff engine (`engine`), the network
family with information converters (`network`), the multi-task losses
(`losses`), ground-truth edge generation (`groundtruth`), the boundary
benchmark (`evaluation`), a synthetic scene generator (`synthdata`), the
training loop (`training`), and the `ddsedge` command line (`cli`).
"""

from ddsedge.backend import BACKEND

__version__ = "0.1.0"
__all__ = ["BACKEND", "__version__"]
