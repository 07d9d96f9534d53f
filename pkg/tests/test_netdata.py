import numpy as np
import pytest
from pydantic import ValidationError

from app.core.errors import EdgeListParseError, InputError
from app.netdata.netdata_access import (
    parse_edge_list,
    read_adjacency_csv,
    read_memberships_csv,
    read_truth_csv,
    serialize_edge_list,
    write_adjacency_csv,
    write_memberships_csv,
    write_truth_csv,
)
from app.netdata.netdata_service import holdout_split, split_mask, synth_cliques
from app.netdata.netdata_validator import ObservationMask, ObservedNetwork


def test_parse_undirected_mirrors_edges():
    net = parse_edge_list(["0 1", "1 2"], n=3)
    expected = np.array([[0, 1, 0], [1, 0, 1], [0, 1, 0]])
    assert np.array_equal(net.adjacency, expected)


def test_parse_directed_keeps_orientation():
    net = parse_edge_list(["0 1"], n=2, directed=True)
    assert net.adjacency[0, 1] == 1
    assert net.adjacency[1, 0] == 0


def test_parse_skips_comments_and_repeats():
    net = parse_edge_list(["# header", "", "0 1", "0 1", "1 0"], n=2)
    assert int(net.adjacency.sum()) == 2


def test_parse_empty_stream():
    net = parse_edge_list([], n=4)
    assert net.adjacency.shape == (4, 4)
    assert not net.adjacency.any()


def test_parse_out_of_range_names_line():
    with pytest.raises(InputError, match="line 2"):
        parse_edge_list(["0 1", "0 5"], n=3)


@pytest.mark.parametrize("line", ["0", "0 1 2", "a b"])
def test_parse_malformed_line(line):
    with pytest.raises(EdgeListParseError) as exc:
        parse_edge_list(["0 1", line], n=3)
    assert exc.value.line_number == 2


def test_serialize_round_trip():
    lines = ["0 1", "0 3", "2 3"]
    net = parse_edge_list(lines, n=4)
    assert serialize_edge_list(net) == lines
    again = parse_edge_list(serialize_edge_list(net), n=4)
    assert np.array_equal(again.adjacency, net.adjacency)


def test_network_rejects_non_binary():
    with pytest.raises(ValidationError):
        ObservedNetwork(n=2, adjacency=[[0, 2], [2, 0]])


def test_undirected_network_must_be_symmetric():
    with pytest.raises(ValidationError):
        ObservedNetwork(n=2, adjacency=[[0, 1], [0, 0]])


def test_mask_rejects_duplicates_and_range():
    with pytest.raises(ValidationError):
        ObservationMask(n=3, pairs=[[0, 1], [0, 1]])
    with pytest.raises(ValidationError):
        ObservationMask(n=3, pairs=[[0, 3]])


def test_mirrored_mask_matrix():
    mask = ObservationMask(n=3, pairs=[[0, 2]], mirrored=True)
    m = mask.to_matrix()
    assert m[0, 2] and m[2, 0]
    assert m.sum() == 2


def test_holdout_split_partitions_modeled_pairs():
    net = parse_edge_list(["0 1", "1 2", "3 4"], n=5)
    train, test = holdout_split(net, 0.8, seed=7)
    k = len(net.modeled_pairs())
    assert k == 10
    assert len(train) == 8
    assert len(test) == 2
    assert not set(train.as_tuples()) & set(test.as_tuples())
    assert np.all(train.pairs[:, 0] < train.pairs[:, 1])


def test_holdout_split_is_seeded():
    net = parse_edge_list(["0 1", "1 2"], n=6)
    a, _ = holdout_split(net, 0.5, seed=1)
    b, _ = holdout_split(net, 0.5, seed=1)
    assert np.array_equal(a.pairs, b.pairs)


def test_holdout_split_rounds_half_up():
    net = ObservedNetwork(n=2, adjacency=np.zeros((2, 2)), directed=True)
    train, test = holdout_split(net, 0.5, seed=0)
    assert len(net.modeled_pairs()) == 2
    assert (len(train), len(test)) == (1, 1)

    net5 = ObservedNetwork(n=5, adjacency=np.zeros((5, 5)))
    train, test = holdout_split(net5, 0.25, seed=0)
    assert len(train) == 3  # round(2.5) -> 3


def test_holdout_split_full_training():
    net = parse_edge_list(["0 1"], n=3)
    train, test = holdout_split(net, 1.0, seed=0)
    assert len(test) == 0
    assert len(train) == 3


def test_holdout_split_rejects_bad_fraction():
    net = parse_edge_list(["0 1"], n=3)
    with pytest.raises(InputError):
        holdout_split(net, 0.0, seed=0)


def test_split_mask_stays_inside_parent():
    net = parse_edge_list(["0 1"], n=6)
    train, _ = holdout_split(net, 0.8, seed=2)
    inner, validation = split_mask(train, 0.8, seed=2)
    parent = set(train.as_tuples())
    assert set(inner.as_tuples()) | set(validation.as_tuples()) == parent


def test_synth_cliques_noise_free_is_block_diagonal():
    net, truth = synth_cliques(3, 10, 0.0, seed=0)
    block = np.kron(np.eye(3), np.ones((10, 10)))
    assert net.n == 30
    assert np.array_equal(net.adjacency, block)
    assert np.array_equal(truth.one_hot.sum(axis=0), np.ones(30))


def test_synth_cliques_flip_count():
    net, _ = synth_cliques(3, 10, 0.05, seed=4)
    block = np.kron(np.eye(3), np.ones((10, 10)))
    assert int((net.adjacency != block).sum()) == 45


def test_synth_cliques_is_seeded():
    a, _ = synth_cliques(3, 10, 0.05, seed=11)
    b, _ = synth_cliques(3, 10, 0.05, seed=11)
    assert np.array_equal(a.adjacency, b.adjacency)


def test_csv_files_round_trip(tmp_path):
    net, truth = synth_cliques(2, 3, 0.1, seed=0)
    write_adjacency_csv(net, tmp_path / "net.csv")
    back = read_adjacency_csv(tmp_path / "net.csv")
    assert np.array_equal(back.adjacency, net.adjacency)

    write_truth_csv(truth, tmp_path / "truth.csv")
    assert np.array_equal(read_truth_csv(tmp_path / "truth.csv", d=2).assignments, truth.assignments)

    U = np.random.default_rng(0).normal(size=(2, 6))
    write_memberships_csv(U, tmp_path / "u.csv")
    assert np.array_equal(read_memberships_csv(tmp_path / "u.csv"), U)


def test_read_adjacency_csv_rejects_non_binary(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("0,1\n3,0\n")
    with pytest.raises(InputError):
        read_adjacency_csv(path)


def test_synthetic_holdout_counts_all_900_pairs():
    net, _ = synth_cliques(3, 10, 0.05, seed=0)
    train, test = holdout_split(net, 0.8, seed=0)
    assert len(net.modeled_pairs()) == 900
    assert (len(train), len(test)) == (720, 180)


def test_synth_two_small_cliques():
    net, truth = synth_cliques(2, 2, 0.0, seed=9)
    expected = np.array([[1, 1, 0, 0], [1, 1, 0, 0], [0, 0, 1, 1], [0, 0, 1, 1]])
    assert np.array_equal(net.adjacency, expected)
    assert np.array_equal(truth.one_hot, [[1, 1, 0, 0], [0, 0, 1, 1]])
