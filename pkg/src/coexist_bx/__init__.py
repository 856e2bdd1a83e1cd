"""coexist-bx - co-existing schema versions via derived view-update programs."""

__version__ = "0.1.0"
__author__ = "Ondrej Svec"
__email__ = "ondrej@aibility.cz"
