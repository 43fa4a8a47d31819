"""exregions: solve, recognize and certify the seven exceptional regions
of closed hyperbolic 3-manifolds."""

__version__ = "0.1.0"

from .catalog import load_bundled, load_catalog, get_region, REGION_NAMES
from .words import Word, parse_word, render_word, invert_word
