"""JSON chart resources for :mod:`qchkit.catalog`."""
