"""Corpus construction toolkit for multilingual Indic pretraining data."""

__version__ = "0.1.0"
