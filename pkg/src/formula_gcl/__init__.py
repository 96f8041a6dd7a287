"""Math formula retrieval with graph contrastive learning and variable substitution."""
__version__ = "0.1.0"
