import numpy as np
import pytest

from dcim.graph import (
    DirectedGraph,
    EdgeListError,
    dump_edge_list,
    extract_dense_subgraph,
    generate_erdos_renyi,
    load_edge_list,
    max_reach,
    reachable_set,
    vertices_on_paths,
    write_relabel_map,
)

from reference import naive_bfs_reach


class TestLoadEdgeList:
    def test_basic_parse(self):
        g = load_edge_list("0 1\n1 2")
        assert g.num_nodes == 3
        assert g.num_edges == 2
        assert g.in_neighbors[2] == [1]

    def test_duplicates_dropped(self):
        g = load_edge_list("0 1\n0 1")
        assert g.num_edges == 1

    def test_self_loop_rejected(self):
        with pytest.raises(EdgeListError, match="line 1"):
            load_edge_list("0 0")

    def test_malformed_line_reports_number(self):
        with pytest.raises(EdgeListError, match="line 2"):
            load_edge_list("0 1\n3 4 5")
        with pytest.raises(EdgeListError, match="line 3"):
            load_edge_list("0 1\n1 2\nx y")

    def test_negative_id(self):
        with pytest.raises(EdgeListError, match="negative"):
            load_edge_list("0 -1")

    def test_comments_and_blank_lines(self):
        g = load_edge_list("# a comment\n\n0 1\n")
        assert g.num_edges == 1

    def test_node_count_header(self):
        g = load_edge_list("# nodes 5\n0 1")
        assert g.num_nodes == 5

    def test_explicit_count_overrides(self):
        assert load_edge_list("0 1", num_nodes=4).num_nodes == 4

    def test_id_exceeding_declared_count(self):
        with pytest.raises(EdgeListError, match="exceeds"):
            load_edge_list("0 7", num_nodes=3)

    def test_roundtrip_preserves_isolated_nodes(self):
        g = DirectedGraph(6, [(0, 1), (2, 3)])
        again = load_edge_list(dump_edge_list(g))
        assert again == g


class TestDirectedGraph:
    def test_rejects_self_loop(self):
        with pytest.raises(ValueError):
            DirectedGraph(2, [(1, 1)])

    def test_rejects_out_of_range(self):
        with pytest.raises(ValueError):
            DirectedGraph(2, [(0, 5)])

    def test_neighbor_lists_sorted_and_consistent(self):
        g = DirectedGraph(4, [(2, 0), (1, 0), (3, 0), (0, 1)])
        assert g.in_neighbors[0] == [1, 2, 3]
        assert g.out_neighbors[0] == [1]
        assert sum(len(x) for x in g.in_neighbors) == g.num_edges
        assert sum(len(x) for x in g.out_neighbors) == g.num_edges


class TestErdosRenyi:
    def test_zero_probability(self):
        assert generate_erdos_renyi(5, 0.0, np.random.default_rng(0)).num_edges == 0

    def test_full_graph(self):
        g = generate_erdos_renyi(3, 1.0, np.random.default_rng(0))
        assert g.num_edges == 6

    def test_seed_determinism(self):
        a = generate_erdos_renyi(20, 0.2, np.random.default_rng(99))
        b = generate_erdos_renyi(20, 0.2, np.random.default_rng(99))
        assert a.edges == b.edges

    def test_mean_edge_count(self):
        rng = np.random.default_rng(7)
        counts = [generate_erdos_renyi(20, 0.2, rng).num_edges for _ in range(300)]
        assert 71 <= np.mean(counts) <= 81  # expectation is 20*19*0.2 = 76

    def test_bad_args(self):
        with pytest.raises(ValueError):
            generate_erdos_renyi(0, 0.5, np.random.default_rng(0))
        with pytest.raises(ValueError):
            generate_erdos_renyi(5, 1.5, np.random.default_rng(0))


class TestExtraction:
    def test_no_qualifying_node(self):
        star = DirectedGraph(5, [(0, 1), (0, 2), (0, 3), (0, 4)])
        with pytest.raises(ValueError, match="no node"):
            extract_dense_subgraph(star, 20, 120, 1, np.random.default_rng(0))

    def test_too_few_qualifying(self):
        star = DirectedGraph(5, [(0, 1), (0, 2), (0, 3), (0, 4)])
        with pytest.raises(ValueError, match="qualify"):
            extract_dense_subgraph(star, 4, 4, 2, np.random.default_rng(0))

    def test_pivot_edges_and_connectivity(self, rng):
        base = generate_erdos_renyi(30, 0.3, rng)
        degs = [base.in_degree(v) + len(base.out_neighbors[v]) for v in range(30)]
        sub, relabel, pivots = extract_dense_subgraph(
            base, min(degs), max(degs), 4, rng)
        inverse = {new: old for old, new in relabel.items()}
        base_edges = set(base.edges)
        for u, v in sub.edges:
            ou, ov = inverse[u], inverse[v]
            assert (ou, ov) in base_edges
            assert ou in pivots or ov in pivots
        # dense relabeling
        assert sorted(relabel.values()) == list(range(sub.num_nodes))

    def test_relabel_map_format(self):
        assert write_relabel_map({10: 0, 3: 1}) == "3 1\n10 0\n"


class TestReachability:
    def test_chain(self):
        g = DirectedGraph(3, [(0, 1), (1, 2)])
        assert reachable_set(g, [0]) == {0, 1, 2}
        assert reachable_set(g, [2]) == {2}

    def test_diamond(self):
        g = DirectedGraph(3, [(0, 2), (1, 2)])
        assert reachable_set(g, [1]) == {1, 2}

    def test_idempotent_on_random_graphs(self, rng):
        for _ in range(50):
            g = generate_erdos_renyi(int(rng.integers(2, 9)), 0.3, rng)
            s = [int(rng.integers(g.num_nodes))]
            r = reachable_set(g, s)
            assert reachable_set(g, sorted(r)) == r

    def test_vertices_on_paths_examples(self):
        g = DirectedGraph(3, [(0, 1), (1, 2)])
        assert vertices_on_paths(g, [0], 2) == {0, 1, 2}
        assert vertices_on_paths(g, [1], 0) == set()
        d = DirectedGraph(3, [(0, 2), (1, 2)])
        assert vertices_on_paths(d, [0, 1], 2) == {0, 1, 2}

    def test_vertices_on_paths_subset_of_reach(self, rng):
        for _ in range(30):
            g = generate_erdos_renyi(6, 0.4, rng)
            s = [int(rng.integers(6))]
            reach = reachable_set(g, s)
            for v in range(6):
                on = vertices_on_paths(g, s, v)
                assert on <= reach
                assert (v in on) == (v in reach)

    def test_max_reach_examples(self):
        assert max_reach(DirectedGraph(3, [(0, 1), (1, 2)])) == 3
        assert max_reach(DirectedGraph(5, [])) == 1
        assert max_reach(DirectedGraph(3, [(0, 1), (1, 2), (2, 0)])) == 3

    def test_max_reach_against_bfs(self, rng):
        for _ in range(25):
            g = generate_erdos_renyi(7, 0.3, rng)
            expected = max(len(naive_bfs_reach(7, g.edges, u)) for u in range(7))
            assert max_reach(g) == expected
