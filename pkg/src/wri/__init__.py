"""Web Reputation Index: collect web indicators per company, min-max
normalize them, combine positive and negative indicators into one score and
rank the companies."""

__version__ = "0.1.0"
