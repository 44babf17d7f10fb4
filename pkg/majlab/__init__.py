"""majlab."""

from majlab.version import __version__
