"""Deterministic corpus of test spaces and functions.

Every generator is a pure function of its parameters (random generators
take explicit seeds fed through SeedSequence), so a corpus built twice
from the same specification is bit-identical — including the JSON/CSV
files written by write_corpus, which a manifest of SHA-256 digests pins
down.
"""

from __future__ import annotations

import csv
import hashlib
import itertools
import json
import os
from dataclasses import dataclass, field

import networkx as nx
import numpy as np

from .errors import InputError, SpaceFormatError
from .space import MetricMeasureSpace, load_space, save_space, space_from_coords


# ----------------------------------------------------------------------
# space generators
# ----------------------------------------------------------------------
def grid_space(n: int, dims: int = 1, spacing: float = 1.0) -> MetricMeasureSpace:
    """n^dims unit-weight points on a cubic lattice with the given spacing."""
    if n < 1 or dims < 1:
        raise InputError(f"grid needs n >= 1 and dims >= 1, got n={n}, dims={dims}")
    coords = np.array(
        list(itertools.product(range(n), repeat=dims)), dtype=float
    ) * spacing
    ids = [str(i) for i in range(len(coords))]
    return space_from_coords(coords, ids=ids)


def path_space(n: int) -> MetricMeasureSpace:
    """Unit-weight points 0, 1, ..., n-1 on a line."""
    return grid_space(n, 1)


def interval_space(n: int) -> MetricMeasureSpace:
    """n equispaced points on [0, 1] with weights 1/n (refinement-friendly)."""
    if n < 1:
        raise InputError(f"interval needs n >= 1, got {n}")
    xs = np.linspace(0.0, 1.0, n) if n > 1 else np.zeros(1)
    ids = [str(i) for i in range(n)]
    return space_from_coords(xs[:, None], ids=ids, weights=np.full(n, 1.0 / n))


def sierpinski_graph_space(level: int) -> MetricMeasureSpace:
    """Graph approximation of the triangular gasket with unit edge lengths.

    Level 0 is a triangle; level k+1 glues three level-k copies at their
    corner vertices.  Points carry unit weight and the shortest-path
    metric.  Vertices live on the lattice i*(1,0) + j*(1/2, sqrt(3)/2)
    and are labelled "i_j" in lexicographic order.
    """
    if level < 0:
        raise InputError(f"gasket level must be >= 0, got {level}")
    edges = {((0, 0), (1, 0)), ((0, 0), (0, 1)), ((1, 0), (0, 1))}
    for k in range(level):
        step = 2**k
        shifted = set()
        for (a, b) in edges:
            for dx, dy in ((step, 0), (0, step)):
                shifted.add(
                    ((a[0] + dx, a[1] + dy), (b[0] + dx, b[1] + dy))
                )
        edges |= shifted
    graph = nx.Graph()
    graph.add_edges_from(edges)
    nodes = sorted(graph.nodes())
    index = {v: i for i, v in enumerate(nodes)}
    n = len(nodes)
    dist = np.zeros((n, n))
    for v, lengths in nx.all_pairs_shortest_path_length(graph):
        for w, d in lengths.items():
            dist[index[v], index[w]] = float(d)
    ids = [f"{i}_{j}" for (i, j) in nodes]
    return MetricMeasureSpace(ids=tuple(ids), dist=dist, weights=np.ones(n))


def random_cloud_space(n: int, dim: int = 2, seed: int = 0) -> MetricMeasureSpace:
    """n unit-weight points drawn uniformly from [0, 1]^dim (seeded)."""
    if n < 1 or dim < 1:
        raise InputError(f"cloud needs n >= 1 and dim >= 1, got n={n}, dim={dim}")
    rng = np.random.default_rng(np.random.SeedSequence([834203, seed, n, dim]))
    coords = rng.random((n, dim))
    ids = [str(i) for i in range(n)]
    return space_from_coords(coords, ids=ids)


_SPACE_KINDS = {
    "grid": grid_space,
    "path": path_space,
    "interval": interval_space,
    "sierpinski_graph": sierpinski_graph_space,
    "random_cloud": random_cloud_space,
}


def generate_space(spec: dict) -> tuple[str, MetricMeasureSpace]:
    """Build one space from a {"kind": ..., **params} specification."""
    spec = dict(spec)
    kind = spec.pop("kind", None)
    label = spec.pop("label", None)
    if kind not in _SPACE_KINDS:
        raise InputError(
            f"unknown space kind {kind!r}; choose from {sorted(_SPACE_KINDS)}"
        )
    space = _SPACE_KINDS[kind](**spec)
    if label is None:
        suffix = "_".join(str(v) for _, v in sorted(spec.items()))
        label = kind if not suffix else f"{kind}_{suffix}"
    return label, space


# ----------------------------------------------------------------------
# function generators
# ----------------------------------------------------------------------
def constant_function(space: MetricMeasureSpace, value: float = 1.0) -> np.ndarray:
    return np.full(space.n, float(value))


def linear_function(space: MetricMeasureSpace, base: int = 0) -> np.ndarray:
    """Distance to a base point — 1-Lipschitz by the triangle inequality."""
    return space.dist[base].copy()


def indicator_function(
    space: MetricMeasureSpace, center: int = 0, radius: float | None = None
) -> np.ndarray:
    """Indicator of the closed ball around a center (default radius diam/3)."""
    if radius is None:
        radius = space.diam / 3.0
    return (space.dist[center] <= radius).astype(float)


def bump_function(
    space: MetricMeasureSpace,
    exponent: float = 1.0,
    center: int | None = None,
    radius: float | None = None,
) -> np.ndarray:
    """max(0, 1 - d(x, center)/radius)^exponent — a Holder-type cusp."""
    if exponent <= 0:
        raise InputError(f"bump exponent must be > 0, got {exponent}")
    if center is None:
        center = space.n // 2
    if radius is None:
        radius = space.diam / 2.0
    if radius <= 0:
        raise InputError(f"bump radius must be > 0, got {radius}")
    return np.clip(1.0 - space.dist[center] / radius, 0.0, None) ** exponent


def random_function(
    space: MetricMeasureSpace, seed: int = 0, low: float = 0.0, high: float = 1.0
) -> np.ndarray:
    rng = np.random.default_rng(np.random.SeedSequence([271828, seed, space.n]))
    return rng.uniform(low, high, space.n)


_FUNCTION_KINDS = {
    "constant": constant_function,
    "linear": linear_function,
    "indicator": indicator_function,
    "bump": bump_function,
    "random": random_function,
}


def generate_function(space: MetricMeasureSpace, spec: dict) -> tuple[str, np.ndarray]:
    """Build one function from a {"kind": ..., **params} specification."""
    spec = dict(spec)
    kind = spec.pop("kind", None)
    label = spec.pop("label", None)
    if kind not in _FUNCTION_KINDS:
        raise InputError(
            f"unknown function kind {kind!r}; choose from {sorted(_FUNCTION_KINDS)}"
        )
    u = _FUNCTION_KINDS[kind](space, **spec)
    if label is None:
        suffix = "_".join(
            f"{v:g}" if isinstance(v, float) else str(v) for _, v in sorted(spec.items())
        )
        label = kind if not suffix else f"{kind}_{suffix}"
    return label, u


# ----------------------------------------------------------------------
# corpora
# ----------------------------------------------------------------------
@dataclass(frozen=True)
class CorpusInstance:
    space_label: str
    function_label: str
    space: MetricMeasureSpace
    u: np.ndarray


@dataclass(frozen=True)
class Corpus:
    name: str
    spaces: dict[str, MetricMeasureSpace]
    instances: tuple[CorpusInstance, ...]
    spec: dict = field(default_factory=dict)


def build_corpus(spec: dict, name: str = "custom") -> Corpus:
    """Materialize a corpus from {"spaces": [...], "functions": [...]}.

    Every function spec is instantiated on every space; specs may pin a
    function to particular spaces with an "only_spaces" list of labels.
    """
    spaces: dict[str, MetricMeasureSpace] = {}
    for sp in spec.get("spaces", []):
        label, space = generate_space(sp)
        if label in spaces:
            raise InputError(f"duplicate space label {label!r}")
        spaces[label] = space
    instances = []
    for fn in spec.get("functions", []):
        fn = dict(fn)
        only = fn.pop("only_spaces", None)
        for label, space in spaces.items():
            if only is not None and label not in only:
                continue
            fn_label, u = generate_function(space, fn)
            instances.append(CorpusInstance(label, fn_label, space, u))
    return Corpus(name=name, spaces=spaces, instances=tuple(instances), spec=spec)


BUILTIN_CORPORA: dict[str, dict] = {
    "two_point": {
        "spaces": [{"kind": "path", "n": 2}],
        "functions": [{"kind": "linear"}, {"kind": "indicator", "radius": 0.25}],
    },
    "small": {
        "spaces": [
            {"kind": "path", "n": 2},
            {"kind": "path", "n": 3},
            {"kind": "grid", "n": 5, "dims": 1},
            {"kind": "sierpinski_graph", "level": 1},
            {"kind": "random_cloud", "n": 6, "dim": 2, "seed": 11},
        ],
        "functions": [
            {"kind": "linear"},
            {"kind": "indicator"},
            {"kind": "bump", "exponent": 0.5},
            {"kind": "random", "seed": 0},
        ],
    },
    "default": {
        "spaces": [
            {"kind": "path", "n": 2},
            {"kind": "path", "n": 3},
            {"kind": "grid", "n": 5, "dims": 1},
            {"kind": "sierpinski_graph", "level": 1},
            {"kind": "random_cloud", "n": 6, "dim": 2, "seed": 11},
            {"kind": "grid", "n": 16, "dims": 1},
            {"kind": "random_cloud", "n": 14, "dim": 2, "seed": 7},
            {"kind": "interval", "n": 32},
        ],
        "functions": [
            {"kind": "constant", "value": 1.0},
            {"kind": "linear"},
            {"kind": "indicator"},
            {"kind": "bump", "exponent": 0.5},
            {"kind": "bump", "exponent": 0.8},
            {"kind": "random", "seed": 0},
            {"kind": "random", "seed": 1},
        ],
    },
    "bounds": {
        "spaces": [
            {"kind": "grid", "n": 5, "dims": 1},
            {"kind": "sierpinski_graph", "level": 1},
            {"kind": "random_cloud", "n": 6, "dim": 2, "seed": 11},
            {"kind": "grid", "n": 16, "dims": 1},
            {"kind": "interval", "n": 32},
        ],
        "functions": [
            {"kind": "linear"},
            {"kind": "indicator"},
            {"kind": "bump", "exponent": 0.5},
            {"kind": "random", "seed": 0},
        ],
    },
}


def builtin_corpus(name: str) -> Corpus:
    if name not in BUILTIN_CORPORA:
        raise InputError(
            f"unknown corpus {name!r}; builtins are {sorted(BUILTIN_CORPORA)}"
        )
    return build_corpus(BUILTIN_CORPORA[name], name=name)


def load_corpus(source: str) -> Corpus:
    """Load a corpus from a builtin name, a spec JSON file, or a directory."""
    if source in BUILTIN_CORPORA:
        return builtin_corpus(source)
    if os.path.isdir(source):
        return read_corpus_dir(source)
    if os.path.isfile(source):
        with open(source, encoding="utf-8") as fh:
            spec = json.load(fh)
        return build_corpus(spec, name=os.path.splitext(os.path.basename(source))[0])
    raise InputError(
        f"corpus source {source!r} is neither a builtin name, a spec file, "
        "nor a corpus directory"
    )


# ----------------------------------------------------------------------
# on-disk corpus
# ----------------------------------------------------------------------
def _write_function_csv(path: str, ids, u: np.ndarray) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["point_id", "u"])
        for pid, val in zip(ids, u):
            writer.writerow([pid, repr(float(val))])


def read_function_csv(path: str, space: MetricMeasureSpace) -> np.ndarray:
    """Read point_id,u rows into an array aligned with the space's ids."""
    u = np.full(space.n, np.nan)
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or header[0] != "point_id":
            raise SpaceFormatError(f"{path}: expected a point_id,u header")
        for row in reader:
            u[space.index(row[0])] = float(row[1])
    if np.isnan(u).any():
        raise SpaceFormatError(f"{path}: missing values for some point ids")
    return u


def write_corpus(corpus: Corpus, out_dir: str) -> str:
    """Write spaces, functions, and a SHA-256 manifest; returns manifest path."""
    os.makedirs(out_dir, exist_ok=True)
    files: dict[str, str] = {}
    for label, space in corpus.spaces.items():
        name = f"{label}.space.json"
        save_space(space, os.path.join(out_dir, name))
        files[name] = _sha256(os.path.join(out_dir, name))
    entries = []
    for inst in corpus.instances:
        name = f"{inst.space_label}__{inst.function_label}.u.csv"
        _write_function_csv(os.path.join(out_dir, name), inst.space.ids, inst.u)
        files[name] = _sha256(os.path.join(out_dir, name))
        entries.append(
            {
                "space": inst.space_label,
                "function": inst.function_label,
                "space_file": f"{inst.space_label}.space.json",
                "u_file": name,
            }
        )
    manifest = {
        "name": corpus.name,
        "schema_version": 1,
        "files": files,
        "instances": entries,
    }
    manifest_path = os.path.join(out_dir, "manifest.json")
    with open(manifest_path, "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, sort_keys=True, indent=2)
        fh.write("\n")
    return manifest_path


def read_corpus_dir(corpus_dir: str) -> Corpus:
    """Rebuild a corpus from a directory written by write_corpus."""
    manifest_path = os.path.join(corpus_dir, "manifest.json")
    if not os.path.isfile(manifest_path):
        raise SpaceFormatError(f"{corpus_dir}: no manifest.json")
    with open(manifest_path, encoding="utf-8") as fh:
        manifest = json.load(fh)
    spaces: dict[str, MetricMeasureSpace] = {}
    instances = []
    for entry in manifest["instances"]:
        label = entry["space"]
        if label not in spaces:
            spaces[label] = load_space(os.path.join(corpus_dir, entry["space_file"]))
        u = read_function_csv(os.path.join(corpus_dir, entry["u_file"]), spaces[label])
        instances.append(CorpusInstance(label, entry["function"], spaces[label], u))
    return Corpus(
        name=manifest.get("name", os.path.basename(corpus_dir)),
        spaces=spaces,
        instances=tuple(instances),
    )


def _sha256(path: str) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            digest.update(chunk)
    return digest.hexdigest()
