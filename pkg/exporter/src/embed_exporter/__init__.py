"""Sentence-encoder export utility.

Deliberately dumb: reads corpus JSONL, runs a pre-trained encoder, writes
vectors in the detection toolkit's embedding file formats.  No labels, no
standardization, no modeling; the boundary with the toolkit is the file
format alone.
"""

__version__ = "0.1.0"


class ExportError(Exception):
    """Raised for unusable inputs or encoder failures."""
