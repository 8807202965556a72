"""Exact enumeration of convex polyominoes and their vertex and perimeter statistics.

Modules: ``geometry`` (polyomino representation and statistics), ``enumerator``
(brute-force census), ``series`` (exact truncated power series), ``gfs``
(closed-form generating functions and kernel equations), ``recurrences``
(column-by-column DP), ``formulas`` (exact and asymptotic formulas),
``verify`` (cross-method checks) and ``cli``.
"""
