"""Industrial flexibility investment under uncertainty."""
__version__ = "0.1.0"
