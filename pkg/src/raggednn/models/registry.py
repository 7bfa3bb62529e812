"""Model registry: architecture name -> GraphModel subclass."""

from __future__ import annotations

from ..exceptions import NotRegisteredError
from ..schemas import ModelSpec
from .base import GraphModel
from .gcn import GCNModel
from .interaction import InteractionModel
from .megnet import MegNetModel
from .mpn import MPNModel
from .schnet import SchNetModel
from .unet import UNetModel

MODEL_CLASSES: dict[str, type[GraphModel]] = {
    cls.name: cls
    for cls in (GCNModel, InteractionModel, MPNModel, SchNetModel, MegNetModel, UNetModel)
}


def build_model(spec: ModelSpec) -> GraphModel:
    """Instantiate the architecture named by ``spec.model`` with seeded parameters.

    Raises:
        NotRegisteredError: for an unknown architecture name.
        ConfigError: if the widths are unresolved or the layer widths do not chain.
    """
    model_class = MODEL_CLASSES.get(spec.model)
    if model_class is None:
        raise NotRegisteredError("model", spec.model, sorted(MODEL_CLASSES))
    return model_class(spec)
