"""causematch: match news articles to causes and nonprofit organizations."""

__version__ = "0.1.0"
