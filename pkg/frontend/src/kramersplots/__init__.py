"""Offline figures from phasekramers experiment artifacts.

Plots are pure functions of the CSV/JSON files an experiment run leaves
behind: no physics is recomputed, and annotated values (fitted orders,
exponents) are echoed verbatim from the JSON summaries.
"""

from .figures import FIGURES, ArtifactError, build_figure, load_run

__version__ = "0.1.0"
