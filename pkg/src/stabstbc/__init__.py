"""Link-level simulation of a stabilizer-code noncoherent 2x2 space-time block code."""

__version__ = "0.1.0"
