"""Coverage analysis of clustered LEO satellite downlinks."""

__version__ = "0.1.0"
