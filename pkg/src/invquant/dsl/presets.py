"""Access to the model files shipped with the package."""

from __future__ import annotations

from functools import lru_cache
from importlib import resources

from ..errors import UndeclaredName
from .model import Model, load

PRESETS = ("identity", "polar", "spherical", "parabolic", "example1", "sphere2", "sigma_demo")


def preset_source(name: str) -> str:
    if name not in PRESETS:
        raise UndeclaredName(f"no preset named {name!r}")
    return resources.files("invquant.presets").joinpath(f"{name}.iq").read_text(encoding="utf-8")


@lru_cache(maxsize=None)
def load_preset(name: str) -> Model:
    return load(preset_source(name))


def find(name: str) -> Model:
    """The preset model that declares ``name``."""
    for preset in PRESETS:
        model = load_preset(preset)
        if name in model.names():
            return model
    raise UndeclaredName(f"{name!r} is not declared in any preset")
