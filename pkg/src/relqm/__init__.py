"""Counting quasimorphisms, barriers and projection complexes on free groups."""
from .freeword import Word, Axis, CyclicData, reduce, parse, axis_of, cyclic_data, tree_distance, project_point_to_axis

__all__ = ["Word", "Axis", "CyclicData", "reduce", "parse", "axis_of", "cyclic_data", "tree_distance",
           "project_point_to_axis"]

__version__ = "0.1.0"
