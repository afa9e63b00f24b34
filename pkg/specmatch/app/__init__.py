"""SpecMatch - spectral graph matching by pairwise eigen-alignments"""

__version__ = "1.0.0"
