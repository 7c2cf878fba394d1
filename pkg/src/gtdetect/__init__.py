"""Toolkit for detecting computer-generated text and probing detector robustness.

Subpackages cover corpus handling, deterministic text preprocessing,
statistical featurization, linear SVM training with Platt calibration,
black-box adversarial attacks (character-edit and synonym-substitution),
and MAUVE-based text quality scoring.
"""

__version__ = "0.1.0"

# Bumped whenever the serialized model JSON layout changes.
MODEL_FORMAT_VERSION = 1


class ToolkitError(Exception):
    """Raised for contract violations and unusable inputs across the toolkit."""
