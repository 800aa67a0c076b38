"""Metric features of real plane curves from Voronoi diagrams of samples."""
