"""Datasets, file formats and the ``manireg`` command line."""
