"""Early prediction of post controversy from discussion trees."""

__version__ = "0.1.0"
