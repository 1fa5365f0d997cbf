"""scarbench: classical/quantum workbench for superscar width-scaling studies."""

__version__ = "0.1.0"
