"""Exhaustive small-map censuses and seeded random map sampling."""

from __future__ import annotations

import itertools
import random
from typing import Iterator, Optional

from . import maps
from .errors import AnnulusError, NotGenusZero
from .maps import AnnulusMap, Dart


def _multigraphs(n_edges: int) -> Iterator[tuple[int, list[tuple[int, int]]]]:
    """Connected multigraphs with `n_edges` edges, vertices 0..n-1, up to edge order."""
    for n_vertices in range(1, n_edges + 2):
        pairs = [
            (i, j) for i in range(n_vertices) for j in range(i, n_vertices)
        ]
        for combo in itertools.combinations_with_replacement(pairs, n_edges):
            used = set()
            for i, j in combo:
                used.add(i)
                used.add(j)
            if used != set(range(n_vertices)):
                continue
            # connectivity
            parent = list(range(n_vertices))

            def find(x):
                while parent[x] != x:
                    parent[x] = parent[parent[x]]
                    x = parent[x]
                return x

            for i, j in combo:
                parent[find(i)] = find(j)
            if len({find(i) for i in range(n_vertices)}) != 1:
                continue
            yield n_vertices, list(combo)


def _rotations(n_vertices: int, combo: list[tuple[int, int]]):
    incident: list[list[Dart]] = [[] for _ in range(n_vertices)]
    for idx, (i, j) in enumerate(combo):
        e = f"e{idx}"
        incident[i].append(Dart(e, 1))
        incident[j].append(Dart(e, -1))
    pools = []
    for v in range(n_vertices):
        darts = incident[v]
        if len(darts) <= 1:
            pools.append([tuple(darts)])
        else:
            first, rest = darts[0], darts[1:]
            pools.append([(first,) + p for p in itertools.permutations(rest)])
    yield from itertools.product(*pools)


def enumerate_connected_maps(
    max_edges: int,
    include_isolated_vertex: bool = True,
    dedupe: bool = True,
) -> Iterator[AnnulusMap]:
    """All connected AnnulusMaps with at most `max_edges` edges.

    Enumerates multigraphs, rotation systems and unordered end-face pairs,
    keeping genus-zero embeddings; with `dedupe` only one representative per
    isomorphism class is produced.
    """
    seen = set()
    if include_isolated_vertex:
        yield maps.build(["v0"], [], {"v0": []}, [])
    for n_edges in range(1, max_edges + 1):
        for n_vertices, combo in _multigraphs(n_edges):
            vnames = [f"v{i}" for i in range(n_vertices)]
            edges = [
                (f"e{idx}", vnames[i], vnames[j]) for idx, (i, j) in enumerate(combo)
            ]
            for rots in _rotations(n_vertices, combo):
                rotation = {vnames[v]: list(rots[v]) for v in range(n_vertices)}
                try:
                    faces, face_of = maps._trace_faces(edges, rotation)
                except AnnulusError:
                    continue
                if n_vertices - n_edges + len(faces) != 2:
                    continue
                nf = len(faces)
                for f0 in range(nf):
                    for f1 in range(f0, nf):
                        amap = maps.build_indexed(vnames, edges, rotation, (f0, f1))
                        if dedupe:
                            key = amap.canonical_key()
                            if key in seen:
                                continue
                            seen.add(key)
                        yield amap


def random_connected_map(
    rng: random.Random, max_edges: int = 8, max_tries: int = 1000
) -> AnnulusMap:
    """A seeded random connected AnnulusMap with 1..max_edges edges."""
    for _ in range(max_tries):
        n_edges = rng.randint(1, max_edges)
        n_vertices = rng.randint(1, n_edges + 1)
        vnames = [f"v{i}" for i in range(n_vertices)]
        combo = []
        for i in range(1, n_vertices):
            combo.append((rng.randrange(i), i))
        while len(combo) < n_edges:
            combo.append((rng.randrange(n_vertices), rng.randrange(n_vertices)))
        if len(combo) > n_edges:
            continue
        combo = [(min(a, b), max(a, b)) for a, b in combo]
        edges = [(f"e{idx}", vnames[i], vnames[j]) for idx, (i, j) in enumerate(combo)]
        incident: dict[str, list[Dart]] = {v: [] for v in vnames}
        for e, t, h in edges:
            incident[t].append(Dart(e, 1))
            incident[h].append(Dart(e, -1))
        rotation = {}
        for v in vnames:
            darts = incident[v][:]
            rng.shuffle(darts)
            rotation[v] = darts
        try:
            faces, _ = maps._trace_faces(edges, rotation)
        except AnnulusError:
            continue
        if n_vertices - n_edges + len(faces) != 2:
            continue
        nf = len(faces)
        f0 = rng.randrange(nf)
        f1 = rng.randrange(nf)
        try:
            return maps.build_indexed(vnames, edges, rotation, tuple(sorted((f0, f1))))
        except NotGenusZero:
            continue
    raise AnnulusError("failed to sample a genus-zero rotation system")
