"""Markov-switching score-driven copula models with CoVaR/CoES risk measurement."""

__version__ = "0.1.0"
