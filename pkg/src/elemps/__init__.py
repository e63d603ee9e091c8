"""Elementary first integrals for first-order ODEs via 3D polynomial systems."""
__version__ = "0.1.0"
