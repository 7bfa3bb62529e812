"""Model architectures assembled from the layers package."""

from .base import GraphModel
from .gcn import GCNModel
from .interaction import InteractionModel
from .megnet import MegNetModel
from .mpn import MPNModel
from .registry import MODEL_CLASSES, build_model
from .schnet import SchNetModel
from .unet import UNetModel

__all__ = [
    "GCNModel",
    "GraphModel",
    "InteractionModel",
    "MODEL_CLASSES",
    "MPNModel",
    "MegNetModel",
    "SchNetModel",
    "UNetModel",
    "build_model",
]
