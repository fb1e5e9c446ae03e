import math
from itertools import combinations

import numpy as np
from django.test import SimpleTestCase

from spinlab.bounds import component_tail_bound
from spinlab.exceptions import GraphFormatError, UsageError
from spinlab.graphs import (
    NOT_BIPARTITE,
    UNBOUNDED,
    Graph,
    bipartite_partition,
    component_of,
    components,
    generate,
    girth,
    line_graph,
    load_graph,
    max_degree,
    sample_component_sizes,
    serialize_graph,
)

from .helpers import cycle, path


class LoadGraphTests(SimpleTestCase):
    def test_comments_and_header(self):
        g = load_graph("# a path\n3 2\n0 1\n# middle\n1 2\n")
        self.assertEqual(g.n, 3)
        self.assertEqual(g.edge_list, ((0, 1), (1, 2)))

    def test_errors_name_the_line(self):
        with self.assertRaisesMessage(GraphFormatError, "line 2"):
            load_graph("3 1\n0 3\n")
        with self.assertRaisesMessage(GraphFormatError, "line 3"):
            load_graph("3 2\n0 1\n1 0\n")
        with self.assertRaisesMessage(GraphFormatError, "line 2"):
            load_graph("2 1\n1 1\n")

    def test_edge_count_must_match_header(self):
        with self.assertRaises(GraphFormatError):
            load_graph("3 2\n0 1\n")
        with self.assertRaises(GraphFormatError):
            load_graph("")

    def test_serialized_document_loads_back(self):
        g = generate("grid", {"rows": 2, "cols": 3})
        text = serialize_graph(g)
        self.assertTrue(text.startswith("6 7\n"))
        self.assertEqual(load_graph(text), g)

    def test_random_graphs_survive_a_round_trip(self):
        for seed in range(20):
            g = generate("gnp", {"n": 3 + seed % 9, "d": 2.5}, seed=seed)
            self.assertEqual(load_graph(serialize_graph(g)), g)
        regular = generate("random_regular", {"n": 10, "d": 3}, seed=8)
        self.assertEqual(load_graph(serialize_graph(regular)), regular)
        self.assertEqual(load_graph(serialize_graph(Graph.from_edges(0, []))).n, 0)

    def test_from_edges_rejects_duplicates(self):
        with self.assertRaises(UsageError):
            Graph.from_edges(3, [(0, 1), (1, 0)])


class StructureTests(SimpleTestCase):
    def test_girth(self):
        self.assertEqual(girth(cycle(5)), 5)
        self.assertEqual(girth(generate("complete", {"n": 4})), 3)
        self.assertEqual(girth(generate("grid", {"rows": 3, "cols": 3})), 4)
        self.assertEqual(girth(generate("complete_bipartite", {"a": 2, "b": 3})), 4)
        self.assertEqual(girth(path(6)), UNBOUNDED)

    def test_max_degree(self):
        self.assertEqual(max_degree(generate("star", {"m": 4})), 4)
        self.assertEqual(max_degree(generate("empty", {"n": 3})), 0)

    def test_line_graph_of_path(self):
        lg, edge_map = line_graph(path(3))
        self.assertEqual(lg.n, 2)
        self.assertEqual(lg.edge_list, ((0, 1),))
        self.assertEqual(edge_map, ((0, 1), (1, 2)))

    def test_line_graph_of_triangle_is_triangle(self):
        lg, _ = line_graph(cycle(3))
        self.assertEqual(lg.m, 3)

    def test_components(self):
        g = path(5)
        self.assertEqual(components(g, [0, 1, 3, 4]), [frozenset({0, 1}), frozenset({3, 4})])
        self.assertEqual(component_of(g, [0, 1, 3], 3), frozenset({3}))
        with self.assertRaises(UsageError):
            component_of(g, [0, 1], 4)

    def test_closed_neighbourhood_removal(self):
        g = path(3)
        self.assertEqual(g.remove_closed_neighborhood(1), frozenset())
        self.assertEqual(g.remove_closed_neighborhood(0), frozenset({2}))
        with self.assertRaises(UsageError):
            g.remove_closed_neighborhood(0, frozenset({1, 2}))

    def test_induced_relabels(self):
        sub, kept = cycle(5).induced([4, 0, 2])
        self.assertEqual(kept, (0, 2, 4))
        self.assertEqual(sub.edge_list, ((0, 2),))

    def test_bipartite_partition(self):
        part = bipartite_partition(cycle(6))
        self.assertEqual(part.left, frozenset({0, 2, 4}))
        self.assertIs(bipartite_partition(cycle(5)), NOT_BIPARTITE)
        part.validate(cycle(6))

    def test_bipartite_partition_puts_each_lowest_vertex_left(self):
        g = Graph.from_edges(6, [(2, 1), (4, 3), (3, 5)])
        part = bipartite_partition(g)
        self.assertEqual(part.left, frozenset({0, 1, 3}))
        self.assertEqual(part.right, frozenset({2, 4, 5}))
        part.validate(g)

    def test_girth_of_edgeless_and_mixed_graphs(self):
        self.assertEqual(girth(Graph.from_edges(0, [])), UNBOUNDED)
        self.assertEqual(girth(Graph.from_edges(4, [])), UNBOUNDED)
        # a triangle and a square sharing no vertex
        g = Graph.from_edges(7, [(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (5, 6), (3, 6)])
        self.assertEqual(girth(g), 3)
        self.assertIsInstance(girth(g), int)

    def test_line_graph_of_star_is_complete(self):
        lg, edge_map = line_graph(generate("star", {"m": 4}))
        self.assertEqual(edge_map, ((0, 1), (0, 2), (0, 3), (0, 4)))
        self.assertEqual(lg.m, 6)

    def test_line_graph_adjacency_matches_shared_endpoints(self):
        g = generate("gnp", {"n": 8, "d": 3}, seed=2)
        lg, edge_map = line_graph(g)
        self.assertEqual(lg.n, g.m)
        for i, j in combinations(range(lg.n), 2):
            shared = bool(set(edge_map[i]) & set(edge_map[j]))
            self.assertEqual(lg.has_edge(i, j), shared)

    def test_components_partition_the_set(self):
        rng = np.random.default_rng(4)
        g = generate("grid", {"rows": 3, "cols": 4})
        for _ in range(20):
            members = set(rng.choice(g.n, size=int(rng.integers(0, g.n + 1)), replace=False).tolist())
            parts = components(g, members)
            self.assertEqual(frozenset().union(*parts), frozenset(members))
            self.assertEqual(sum(len(p) for p in parts), len(members))
            self.assertEqual([min(p) for p in parts], sorted(min(p) for p in parts))
            for part in parts:
                self.assertEqual(component_of(g, members, min(part)), part)
        self.assertEqual(components(g, []), [])


class GeneratorTests(SimpleTestCase):
    def test_random_regular_is_regular_and_seeded(self):
        g = generate("random_regular", {"n": 10, "d": 3}, seed=7)
        self.assertEqual(set(g.degrees), {3})
        self.assertEqual(g, generate("random_regular", {"n": 10, "d": 3}, seed=7))

    def test_random_regular_sweep(self):
        for n, d in ((4, 3), (6, 2), (7, 2), (8, 3), (9, 4), (10, 4), (12, 3)):
            for seed in range(3):
                g = generate("random_regular", {"n": n, "d": d}, seed=seed)
                self.assertEqual(g.n, n)
                self.assertEqual(g.degrees, (d,) * n, (n, d, seed))
                self.assertEqual(g.m, n * d // 2)

    def test_random_regular_rejects_fractional_degree(self):
        with self.assertRaises(UsageError):
            generate("random_regular", {"n": 8, "d": 2.5})
        self.assertEqual(
            generate("random_regular", {"n": 8, "d": 3.0}, seed=1),
            generate("random_regular", {"n": 8, "d": 3}, seed=1),
        )

    def test_random_regular_needs_even_stub_count(self):
        with self.assertRaises(UsageError):
            generate("random_regular", {"n": 5, "d": 3})

    def test_gnp_is_seeded(self):
        a = generate("gnp", {"n": 12, "d": 3}, seed=1)
        self.assertEqual(a, generate("gnp", {"n": 12, "d": 3}, seed=1))

    def test_gnp_mean_edge_count(self):
        # each of the C(100, 2) pairs appears with probability 2/100
        seeds = 300
        counts = np.array([generate("gnp", {"n": 100, "d": 2}, seed=s).m for s in range(seeds)])
        p = 2 / 100
        sd = math.sqrt(4950 * p * (1 - p))
        self.assertAlmostEqual(counts.mean(), 99.0, delta=4 * sd / math.sqrt(seeds))

    def test_unknown_family(self):
        with self.assertRaises(UsageError):
            generate("petersen", {})

    def test_complete_bipartite_counts(self):
        g = generate("complete_bipartite", {"a": 2, "b": 3})
        self.assertEqual((g.n, g.m), (5, 6))


class ComponentTailTests(SimpleTestCase):
    def test_monte_carlo_stays_under_the_tail_bound(self):
        g = cycle(10)
        samples = 20_000
        counts = sample_component_sizes(g, 0.3, 0, samples, seed=3)
        self.assertEqual(counts.sum(), samples)
        for k in (1, 2, 3):
            freq = counts[k] / samples
            se = math.sqrt(max(freq * (1 - freq), 1e-12) / samples)
            self.assertLessEqual(freq, component_tail_bound(10, 2, 0.3, k) + 4 * se)

    def test_singleton_frequency_matches_exact_value(self):
        # P[v in S and no neighbour in S] = 0.3 * C(7,2) / C(9,2)
        counts = sample_component_sizes(cycle(10), 0.3, 0, 20_000, seed=5)
        self.assertAlmostEqual(counts[1] / 20_000, 0.175, delta=0.015)
