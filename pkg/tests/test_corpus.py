from __future__ import annotations

import json

import numpy as np
import pytest

import fracmax as fm
from fracmax.corpus import (
    BUILTIN_CORPORA,
    build_corpus,
    builtin_corpus,
    bump_function,
    generate_function,
    generate_space,
    grid_space,
    interval_space,
    load_corpus,
    path_space,
    random_cloud_space,
    read_corpus_dir,
    read_function_csv,
    sierpinski_graph_space,
    write_corpus,
)
from fracmax.errors import InputError, SpaceFormatError


# ----------------------------------------------------------------------
# generators
# ----------------------------------------------------------------------
def test_generators_produce_valid_metrics():
    for space in (
        grid_space(3, dims=2),
        interval_space(9),
        sierpinski_graph_space(2),
        random_cloud_space(10, dim=3, seed=4),
    ):
        assert fm.audit_metric(space.dist)["ok"]
        assert np.all(space.weights > 0)


def test_grid_and_interval_shapes():
    g = grid_space(3, dims=2, spacing=0.5)
    assert g.n == 9
    assert g.diam == pytest.approx(np.hypot(1.0, 1.0))
    iv = interval_space(5)
    assert iv.diam == 1.0
    assert iv.weights == pytest.approx(np.full(5, 0.2))
    with pytest.raises(InputError):
        grid_space(0)


def test_gasket_counts_and_diameter():
    # level k has 3 (3^k + 1) / 2 vertices and graph diameter 2^k
    for level, n_pts in ((0, 3), (1, 6), (2, 15)):
        space = sierpinski_graph_space(level)
        assert space.n == n_pts
        assert space.diam == float(2**level)
        assert list(space.ids) == sorted(space.ids)
    with pytest.raises(InputError):
        sierpinski_graph_space(-1)


def test_cloud_determinism():
    a = random_cloud_space(16, dim=2, seed=7)
    b = random_cloud_space(16, dim=2, seed=7)
    assert np.array_equal(a.dist, b.dist)
    c = random_cloud_space(16, dim=2, seed=8)
    assert not np.array_equal(a.dist, c.dist)


def test_space_labels():
    assert generate_space({"kind": "path", "n": 2})[0] == "path_2"
    assert generate_space({"kind": "grid", "n": 5, "dims": 1})[0] == "grid_1_5"
    assert generate_space({"kind": "sierpinski_graph", "level": 1})[0] == (
        "sierpinski_graph_1"
    )
    label, _ = generate_space({"kind": "path", "n": 3, "label": "custom"})
    assert label == "custom"
    with pytest.raises(InputError):
        generate_space({"kind": "moebius", "n": 3})


def test_function_labels_and_kinds(path5):
    assert generate_function(path5, {"kind": "linear"})[0] == "linear"
    assert generate_function(path5, {"kind": "bump", "exponent": 0.5})[0] == "bump_0.5"
    assert generate_function(path5, {"kind": "random", "seed": 3})[0] == "random_3"
    with pytest.raises(InputError):
        generate_function(path5, {"kind": "sawtooth"})
    with pytest.raises(InputError):
        generate_function(path5, {"kind": "bump", "exponent": -1.0})


def test_random_function_determinism(path5):
    a = generate_function(path5, {"kind": "random", "seed": 2})[1]
    b = generate_function(path5, {"kind": "random", "seed": 2})[1]
    assert np.array_equal(a, b)
    assert not np.array_equal(a, generate_function(path5, {"kind": "random", "seed": 3})[1])


def test_bump_has_finite_canonical_gradient():
    space = grid_space(16, 1)
    u = bump_function(space, exponent=0.5)
    g = fm.canonical_gradient(space, u, 0.5)
    assert np.all(np.isfinite(g)) and np.any(g > 0)


# ----------------------------------------------------------------------
# corpus building
# ----------------------------------------------------------------------
def test_build_corpus_is_deterministic():
    spec = BUILTIN_CORPORA["small"]
    a, b = build_corpus(spec, "x"), build_corpus(spec, "x")
    assert list(a.spaces) == list(b.spaces)
    for inst_a, inst_b in zip(a.instances, b.instances):
        assert inst_a.space_label == inst_b.space_label
        assert inst_a.function_label == inst_b.function_label
        assert np.array_equal(inst_a.u, inst_b.u)
        assert np.array_equal(inst_a.space.dist, inst_b.space.dist)


def test_builtin_corpora_space_sizes():
    # vertex enumeration stays tractable below 13 points, so every builtin
    # space is either small enough to enumerate or clearly out of range
    for name in BUILTIN_CORPORA:
        for label, space in builtin_corpus(name).spaces.items():
            assert space.n <= 7 or space.n >= 13, (name, label, space.n)


def test_only_spaces_pins_functions():
    corpus = build_corpus(
        {
            "spaces": [{"kind": "path", "n": 2}, {"kind": "path", "n": 3}],
            "functions": [
                {"kind": "linear"},
                {"kind": "indicator", "only_spaces": ["path_3"]},
            ],
        }
    )
    labels = [(i.space_label, i.function_label) for i in corpus.instances]
    assert ("path_2", "linear") in labels and ("path_3", "linear") in labels
    assert ("path_3", "indicator") in labels
    assert all(not (s == "path_2" and f == "indicator") for s, f in labels)


def test_duplicate_space_label_rejected():
    with pytest.raises(InputError):
        build_corpus({"spaces": [{"kind": "path", "n": 2}, {"kind": "path", "n": 2}]})


def test_unknown_builtin_rejected():
    with pytest.raises(InputError):
        builtin_corpus("enormous")


# ----------------------------------------------------------------------
# on-disk corpus
# ----------------------------------------------------------------------
def test_corpus_roundtrip_and_manifest(tmp_path):
    corpus = builtin_corpus("small")
    out = tmp_path / "c1"
    manifest_path = write_corpus(corpus, str(out))
    manifest = json.loads(open(manifest_path).read())
    assert manifest["schema_version"] == 1
    assert manifest["name"] == "small"
    assert len(manifest["instances"]) == len(corpus.instances)

    back = read_corpus_dir(str(out))
    assert list(back.spaces) == list(corpus.spaces)
    for inst_a, inst_b in zip(corpus.instances, back.instances):
        assert inst_a.function_label == inst_b.function_label
        assert np.array_equal(inst_a.u, inst_b.u)
        assert np.array_equal(inst_a.space.dist, inst_b.space.dist)
        assert np.array_equal(inst_a.space.weights, inst_b.space.weights)

    # a second write is byte-identical, digests included
    out2 = tmp_path / "c2"
    write_corpus(corpus, str(out2))
    m1 = json.loads((out / "manifest.json").read_text())
    m2 = json.loads((out2 / "manifest.json").read_text())
    assert m1 == m2
    for name in m1["files"]:
        assert (out / name).read_bytes() == (out2 / name).read_bytes()


def test_read_corpus_requires_manifest(tmp_path):
    with pytest.raises(SpaceFormatError):
        read_corpus_dir(str(tmp_path))


def test_function_csv_errors(tmp_path, path5):
    bad_header = tmp_path / "bad.csv"
    bad_header.write_text("id,value\n0,1.0\n")
    with pytest.raises(SpaceFormatError):
        read_function_csv(str(bad_header), path5)
    missing = tmp_path / "missing.csv"
    missing.write_text("point_id,u\n0,1.0\n1,2.0\n")
    with pytest.raises(SpaceFormatError):
        read_function_csv(str(missing), path5)


def test_load_corpus_sources(tmp_path):
    assert load_corpus("two_point").name == "two_point"

    spec_file = tmp_path / "tiny.json"
    spec_file.write_text(
        json.dumps(
            {"spaces": [{"kind": "path", "n": 3}], "functions": [{"kind": "linear"}]}
        )
    )
    corpus = load_corpus(str(spec_file))
    assert corpus.name == "tiny" and len(corpus.instances) == 1

    out = tmp_path / "ondisk"
    write_corpus(corpus, str(out))
    assert len(load_corpus(str(out)).instances) == 1

    with pytest.raises(InputError):
        load_corpus(str(tmp_path / "nowhere"))
