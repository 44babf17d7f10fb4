"""Package version."""

VERSION = "0.1.0.dev0"
__version__ = VERSION
