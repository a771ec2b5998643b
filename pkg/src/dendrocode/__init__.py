"""Exact coding of rooted, ordered, measured real trees by height functions."""
from .codec import (EmptyMeasure, ExplorationState, MesViolation, PiecewiseMap, aldous_height, canonical_form,
                    decode, encode, equivalent, exploration_point, graph_distance, shared_atoms, time_change)
from .height import (HeightFunction, Interval, IntervalSet, Knot, continuify, four_times_check, is_minimal,
                     min_on, quotient_distance, total_variation, validate, visit_sets)
from .order import (Ordering, PlanarOrder, StructuredTree, TreeMeasure, check_compatibility, check_inc, check_mes,
                    compare, enumerate_compatible_orders, left_set_measure, shuffle)
from .random_gen import (PlaneTree, RandomTreeParams, discrete_height_process, excursion_walk, gw_plane_tree,
                         lifo_height, random_structured_tree)
from .rational import Q, Rational
from .tree import EdgePoint, ForeignPointError, RealTree, TreePoint, Vertex

__all__ = [name for name in dir() if not name.startswith("_")]
