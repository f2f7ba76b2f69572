"""BIM-aware drift correction for plane-based SLAM."""

import json

from ._bimdrift import *  # noqa: F401,F403
from ._bimdrift import compare_variants_json


def compare_variants(keyframes, model, variants=("initial_manual", "global", "local"), config=None):
    """Comparison report as a dict; `config` holds flat run-config keys."""
    text = compare_variants_json(keyframes, model, list(variants), json.dumps(config or {}))
    return json.loads(text)
