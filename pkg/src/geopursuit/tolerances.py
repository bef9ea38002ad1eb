"""Shared numeric tolerances, stated once and reused everywhere.

POINT_TOL   point-validity slack (membership in a domain)
GEOM_TOL    geometric identities: lengths, tangency, chaining, monotonicity
ANGLE_TOL   angle checks; looser because angles near degenerate triangles
            amplify distance error
ORACLE_TOL  agreement with discretized oracles (grid graphs, sampled curves)
"""

POINT_TOL = 1e-12
GEOM_TOL = 1e-9
ANGLE_TOL = 1e-6
ORACLE_TOL = 1e-3
