import numpy as np
import pytest

from embalign import EmbeddingSet, intersect_on_images, load_embeddings, save_embeddings
from embalign.errors import (
    ConsistencyError,
    DataError,
    EmptyIntersectionError,
    FormatError,
    LabelConflictError,
)


def make_set(rows, ids, labels, name="m"):
    return EmbeddingSet(name, "ds", np.asarray(rows, dtype=np.float32), ids, labels)


def test_binary_round_trip_bitwise(tmp_path):
    rng = np.random.default_rng(0)
    s = make_set(rng.standard_normal((7, 5)), [f"i{k}" for k in range(7)],
                 ["a", "a", "b", "b", "c", "c", "c"])
    path = str(tmp_path / "x.emb")
    save_embeddings(s, path, "binary")
    s2 = load_embeddings(path, "binary", model_name="m", dataset_name="ds")
    assert np.array_equal(s.rows, s2.rows)
    assert s.image_ids == s2.image_ids
    assert s.labels == s2.labels


def test_binary_direct_load(tmp_path):
    s = make_set([[1, 0, 0], [0, 1, 0]], ["x", "y"], ["a", "b"])
    path = str(tmp_path / "t.emb")
    save_embeddings(s, path)
    loaded = load_embeddings(path)
    assert loaded.n == 2 and loaded.dim == 3


def test_csv_round_trip_exact_dyadic(tmp_path):
    s = make_set([[0.5, -0.25]], ["a"], ["x"])
    path = str(tmp_path / "x.csv")
    save_embeddings(s, path, "csv")
    s2 = load_embeddings(path, "csv")
    assert np.array_equal(s.rows, s2.rows)


def test_csv_parse(tmp_path):
    path = tmp_path / "x.csv"
    path.write_text("image_id,identity,e0,e1\ni1,a,1.0,2.0\ni2,b,3.0,4.0\ni3,b,5.0,6.0\n")
    s = load_embeddings(str(path), "csv")
    assert s.n == 3 and s.dim == 2
    assert s.labels == ("a", "b", "b")


def test_wrong_format_flag_raises(tmp_path):
    s = make_set([[1.0, 2.0]], ["a"], ["x"])
    path = str(tmp_path / "x.emb")
    save_embeddings(s, path, "binary")
    with pytest.raises(FormatError):
        load_embeddings(path, "csv")


def test_bad_magic(tmp_path):
    path = tmp_path / "bad.emb"
    path.write_bytes(b"NOPE" + b"\x00" * 16)
    with pytest.raises(FormatError):
        load_embeddings(str(path), "binary")


def test_label_count_mismatch(tmp_path):
    s = make_set(np.eye(5, 3), [f"i{k}" for k in range(5)], list("aabbc"))
    path = str(tmp_path / "x.emb")
    save_embeddings(s, path)
    lpath = tmp_path / "x.labels.tsv"
    lines = lpath.read_text().splitlines()
    lpath.write_text("\n".join(lines[:4]) + "\n")
    with pytest.raises(ConsistencyError):
        load_embeddings(path)


def test_nonfinite_rejected():
    with pytest.raises(DataError):
        make_set([[np.nan, 1.0]], ["a"], ["x"])


def test_duplicate_ids_rejected():
    with pytest.raises(ConsistencyError):
        make_set([[1.0], [2.0]], ["a", "a"], ["x", "y"])


def test_intersect_reorders_to_lexicographic():
    a = make_set([[1.0], [2.0], [3.0]], ["c", "a", "b"], ["1", "2", "3"])
    b = make_set([[9.0], [8.0], [7.0]], ["a", "b", "c"], ["2", "3", "1"])
    ia, ib = intersect_on_images(a, b)
    assert ia.image_ids == ("a", "b", "c") == ib.image_ids
    assert ia.rows[:, 0].tolist() == [2.0, 3.0, 1.0]
    assert ib.rows[:, 0].tolist() == [9.0, 8.0, 7.0]
    assert ia.labels == ib.labels == ("2", "3", "1")


def test_intersect_partial_overlap():
    a = make_set([[1.0], [2.0], [3.0]], ["1", "2", "3"], ["x", "y", "z"])
    b = make_set([[4.0], [5.0], [6.0]], ["2", "3", "4"], ["y", "z", "w"])
    ia, ib = intersect_on_images(a, b)
    assert ia.image_ids == ("2", "3")
    assert ib.image_ids == ("2", "3")


def test_intersect_disjoint():
    a = make_set([[1.0]], ["1"], ["x"])
    b = make_set([[2.0]], ["2"], ["y"])
    with pytest.raises(EmptyIntersectionError):
        intersect_on_images(a, b)


def test_intersect_label_conflict():
    a = make_set([[1.0]], ["1"], ["x"])
    b = make_set([[2.0]], ["1"], ["y"])
    with pytest.raises(LabelConflictError):
        intersect_on_images(a, b)


def test_intersect_idempotent():
    rng = np.random.default_rng(3)
    a = make_set(rng.standard_normal((6, 2)), list("fedcba"), list("xxyyzz"))
    b = make_set(rng.standard_normal((6, 2)), list("abcdef"),
                 list("xxyyzz")[::-1])
    ia, ib = intersect_on_images(a, b)
    ia2, ib2 = intersect_on_images(ia, ib)
    assert ia2.image_ids == ia.image_ids
    assert np.array_equal(ia2.rows, ia.rows)
    assert np.array_equal(ib2.rows, ib.rows)
