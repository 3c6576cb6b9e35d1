"""Leader-follower communication graphs.

A network of ``N`` followers and one leader is modeled as a weighted
digraph on nodes ``0..N`` where node 0 is the leader.  An edge
``(j, i, w)`` means agent ``i`` receives information from agent ``j``
with weight ``w > 0``; the leader never receives anything, so edges
into node 0 are rejected.

The object of interest for synthesis is the follower-to-follower
coupling matrix ``H``: the lower-right ``N x N`` block of the graph
Laplacian.  Its spectrum decides whether a distributed design exists,
and the equivalence between "every eigenvalue of H has positive real
part" and "the graph contains a spanning tree rooted at the leader" is
exposed as two independently computed predicates so it can be checked
rather than assumed.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError, NumericalError
from .matrixops import eigenvalues

__all__ = [
    "Digraph",
    "adjacency",
    "laplacian",
    "h_matrix",
    "has_leader_spanning_tree",
    "connectivity_spectral_check",
]


@dataclass(frozen=True)
class Digraph:
    """Weighted leader-follower digraph on nodes ``0..n_followers``.

    Parameters
    ----------
    n_followers : int
        Number of followers ``N``; nodes are ``0`` (leader) through ``N``.
    edges : sequence of (int, int, float)
        Directed edges ``(source, target, weight)``.  Information flows
        from source to target.
    """

    n_followers: int
    edges: tuple = field(default=())

    def __post_init__(self):
        if not isinstance(self.n_followers, (int, np.integer)) or self.n_followers < 1:
            raise ConfigurationError(
                f"graph.n_followers: must be a positive integer, got {self.n_followers!r}"
            )
        seen = set()
        norm = []
        for k, edge in enumerate(self.edges):
            try:
                src, dst, w = edge
            except (TypeError, ValueError):
                raise ConfigurationError(
                    f"graph.edges[{k}]: expected (source, target, weight), got {edge!r}"
                )
            src, dst, w = int(src), int(dst), float(w)
            n = self.n_followers
            if not (0 <= src <= n) or not (0 <= dst <= n):
                raise ConfigurationError(
                    f"graph.edges[{k}]: node index out of range 0..{n}: ({src}, {dst})"
                )
            if src == dst:
                raise ConfigurationError(f"graph.edges[{k}]: self-loop at node {src}")
            if dst == 0:
                raise ConfigurationError(
                    f"graph.edges[{k}]: edge into the leader (node 0) is not allowed"
                )
            if not np.isfinite(w) or w <= 0.0:
                raise ConfigurationError(
                    f"graph.edges[{k}]: weight must be finite and positive, got {w}"
                )
            if (src, dst) in seen:
                raise ConfigurationError(
                    f"graph.edges[{k}]: duplicate edge ({src}, {dst})"
                )
            seen.add((src, dst))
            norm.append((src, dst, w))
        object.__setattr__(self, "edges", tuple(norm))
        object.__setattr__(self, "n_followers", int(self.n_followers))

    def in_edges(self, i):
        """List of ``(source, weight)`` pairs feeding node ``i`` (leader included)."""
        return [(src, w) for (src, dst, w) in self.edges if dst == i]


def adjacency(g):
    """Weighted adjacency matrix ``A`` with ``A[i, j]`` the weight of edge ``j -> i``."""
    n = g.n_followers + 1
    a = np.zeros((n, n))
    for src, dst, w in g.edges:
        a[dst, src] = w
    return a


def laplacian(g):
    """Graph Laplacian ``L = diag(row sums of A) - A`` over all ``N + 1`` nodes."""
    a = adjacency(g)
    return np.diag(a.sum(axis=1)) - a


def h_matrix(g):
    """Follower coupling matrix and leader weight diagonal.

    Returns
    -------
    h : ndarray
        Lower-right ``N x N`` block of the Laplacian.
    delta : ndarray
        ``N x N`` diagonal matrix of leader edge weights ``a_{i0}``.

    Notes
    -----
    By construction each row of ``h`` sums to the corresponding leader
    weight, i.e. ``h @ ones == delta @ ones``.  The identity is verified
    numerically and a violation raises :class:`NumericalError`, since it
    would indicate an internal assembly bug rather than bad user input.
    """
    lap = laplacian(g)
    h = lap[1:, 1:].copy()
    a = adjacency(g)
    delta = np.diag(a[1:, 0].copy())
    ones = np.ones(g.n_followers)
    if not np.allclose(h @ ones, delta @ ones, rtol=0.0, atol=1e-12):
        raise NumericalError("h_matrix: row-sum identity H 1 == delta 1 failed")
    return h, delta


def has_leader_spanning_tree(g):
    """True if every follower is reachable from the leader along edge directions.

    Plain breadth-first search on the edge list; shares no code with the
    spectral test so the two can validate each other.
    """
    succ = {}
    for src, dst, _ in g.edges:
        succ.setdefault(src, []).append(dst)
    seen = {0}
    frontier = [0]
    while frontier:
        nxt = []
        for u in frontier:
            for v in succ.get(u, ()):
                if v not in seen:
                    seen.add(v)
                    nxt.append(v)
        frontier = nxt
    return len(seen) == g.n_followers + 1


def connectivity_spectral_check(g, tol=1e-9):
    """True if every eigenvalue of ``H`` has real part greater than ``tol``.

    Equivalent to :func:`has_leader_spanning_tree` in exact arithmetic;
    computed from the spectrum so the equivalence is testable.
    """
    h, _ = h_matrix(g)
    return bool(np.min(np.real(eigenvalues(h, "H"))) > tol)
