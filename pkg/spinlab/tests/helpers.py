"""Small graphs shared by the test modules."""
from spinlab.graphs import Graph, generate


def k2() -> Graph:
    return Graph.from_edges(2, [(0, 1)])


def single() -> Graph:
    return Graph.from_edges(1, [])


def path(n: int) -> Graph:
    return generate("path", {"n": n})


def cycle(n: int) -> Graph:
    return generate("cycle", {"n": n})


def star(m: int) -> Graph:
    return generate("star", {"m": m})


def empty(n: int) -> Graph:
    return generate("empty", {"n": n})
