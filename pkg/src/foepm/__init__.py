"""Rule-driven predictive monitoring over event logs."""

__version__ = "0.1.0"
