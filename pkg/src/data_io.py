#!/usr/bin/env python3
"""
Data ingestion and synthetic instance generation
Embedding, rating and coverage files, Gaussian blob instances, balanced
partitioning and the progress-ratio statistics file.
"""

import csv
import io
import itertools
import logging
import math
import re
from pathlib import Path
from typing import List, Tuple, Union

import numpy as np
import pandas as pd

from comm_sim import EtaStats
from errors import ConstructionError, FormatError
from experiment_config import SyntheticSpec
from multilinear import DATA_STREAM, stream_rng
from objectives import Embeddings, RatingObjective, WeightedCoverage

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]
PARSER_LINE = re.compile(r'line (\d+)')


def _read_text(path: Path) -> str:
    raw = path.read_bytes()
    try:
        return raw.decode('utf-8')
    except UnicodeDecodeError as e:
        raise FormatError("file is not valid UTF-8 text", str(path), raw[:e.start].count(b'\n') + 1)


def _read_table(path: Path, kind: str) -> pd.DataFrame:
    """pd.read_csv with malformed input reported as FormatError"""
    try:
        return pd.read_csv(io.StringIO(_read_text(path)))
    except pd.errors.EmptyDataError:
        raise FormatError(f"empty {kind} file", str(path))
    except pd.errors.ParserError as e:
        match = PARSER_LINE.search(str(e))
        raise FormatError(f"malformed {kind} row", str(path), int(match.group(1)) if match else None)


def load_embeddings(path: PathLike, sigma: float = 1.0) -> Embeddings:
    """
    Load feature embeddings from CSV

    Args:
        path: File with header id,f0,...,f{d-1} and rows sorted by id 0..n-1
        sigma: RBF bandwidth attached to the embeddings

    Returns:
        Embeddings with one row per element
    """
    path = Path(path)
    rows: List[List[float]] = []
    with io.StringIO(_read_text(path), newline='') as f:
        reader = csv.reader(f)
        header = next(reader, None)
        if header is None:
            raise FormatError("empty embeddings file", str(path), 1)
        if len(header) < 2 or header[0].strip() != 'id':
            raise FormatError("header must be id,f0,...,f{d-1}", str(path), 1)
        width = len(header)

        for record in reader:
            line = reader.line_num
            if not record or all(not cell.strip() for cell in record):
                continue
            if len(record) != width:
                raise FormatError(f"expected {width} columns, got {len(record)}", str(path), line)
            try:
                element = int(record[0])
            except ValueError:
                raise FormatError(f"non-integer id '{record[0]}'", str(path), line)
            if element != len(rows):
                raise FormatError(f"expected id {len(rows)}, got {element} (rows missing or unsorted)",
                                  str(path), line)
            try:
                values = [float(cell) for cell in record[1:]]
            except ValueError:
                raise FormatError("non-numeric feature value", str(path), line)
            if not all(math.isfinite(v) for v in values):
                raise FormatError("NaN or infinite feature value", str(path), line)
            rows.append(values)

    if not rows:
        raise FormatError("no embedding rows", str(path))
    logger.info(f"Loaded {len(rows)} embeddings of dimension {width - 1} from {path}")
    return Embeddings(np.array(rows), sigma)


def write_embeddings_csv(emb: Embeddings, path: PathLike) -> Path:
    """Write embeddings as id,f0,...; floats use repr so they read back exactly"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, 'w', newline='', encoding='utf-8') as f:
        writer = csv.writer(f, lineterminator='\n')
        writer.writerow(['id'] + [f"f{k}" for k in range(emb.dim)])
        for element, vector in enumerate(emb.vectors):
            writer.writerow([element] + [repr(float(v)) for v in vector])
    logger.info(f"Embeddings written to {path}")
    return path


def _dense_ids(column: pd.Series) -> np.ndarray:
    """Codes 0..k-1 in sorted id order; the identity on ids that are already 0..k-1"""
    codes, _ = pd.factorize(column, sort=True)
    return codes.astype(np.int64)


def load_ratings(path: PathLike) -> RatingObjective:
    """
    Load a user,item,rating CSV into the rating objective

    Args:
        path: Ratings file; user and item ids of any kind are mapped to 0..k-1 in sorted order

    Returns:
        RatingObjective with unrated entries equal to 0
    """
    path = Path(path)
    frame = _read_table(path, 'ratings')
    missing = {'user', 'item', 'rating'} - set(frame.columns)
    if missing:
        raise FormatError(f"missing columns {sorted(missing)}", str(path), 1)
    if frame.empty:
        raise FormatError("no ratings", str(path))

    ratings = pd.to_numeric(frame['rating'], errors='coerce')
    bad = ratings.isna() | ~np.isfinite(ratings.fillna(0.0))
    if bad.any():
        raise FormatError("non-numeric rating", str(path), int(bad.idxmax()) + 2)
    if (ratings < 0).any():
        raise FormatError("negative rating", str(path), int((ratings < 0).idxmax()) + 2)
    duplicated = frame.duplicated(subset=['user', 'item'])
    if duplicated.any():
        raise FormatError("duplicate (user, item) pair", str(path), int(duplicated.idxmax()) + 2)

    users = _dense_ids(frame['user'])
    items = _dense_ids(frame['item'])
    matrix = np.zeros((int(users.max()) + 1, int(items.max()) + 1))
    matrix[users, items] = ratings.to_numpy(dtype=float)
    logger.info(f"Loaded {len(frame)} ratings: {matrix.shape[0]} users x {matrix.shape[1]} items")
    return RatingObjective(matrix)


def load_coverage(path: PathLike, item_weights=None) -> WeightedCoverage:
    """
    Load an element,item incidence CSV into a weighted coverage objective

    Args:
        path: One row per (element, covered item) pair
        item_weights: Optional per-item weights (default 1)

    Returns:
        WeightedCoverage over elements 0..max element id
    """
    path = Path(path)
    frame = _read_table(path, 'coverage')
    if {'element', 'item'} - set(frame.columns):
        raise FormatError("header must be element,item", str(path), 1)
    if frame.empty:
        raise FormatError("no coverage pairs", str(path))
    if not (pd.api.types.is_integer_dtype(frame['element']) and pd.api.types.is_integer_dtype(frame['item'])):
        raise FormatError("element and item ids must be integers", str(path))
    if (frame['element'] < 0).any() or (frame['item'] < 0).any():
        raise FormatError("ids must be nonnegative", str(path))

    sets: List[List[int]] = [[] for _ in range(int(frame['element'].max()) + 1)]
    for element, item in zip(frame['element'], frame['item']):
        sets[int(element)].append(int(item))
    logger.info(f"Loaded coverage of {len(sets)} elements from {path}")
    return WeightedCoverage(sets, item_weights)


def _cluster_centers(spec: SyntheticSpec) -> np.ndarray:
    """Centers pairwise at least inter_cluster_distance apart"""
    distance = spec.inter_cluster_distance
    if spec.dim >= spec.clusters:
        centers = np.zeros((spec.clusters, spec.dim))
        centers[:, :spec.clusters] = np.eye(spec.clusters) * (distance / math.sqrt(2.0))
        return centers
    side = 1
    while side ** spec.dim < spec.clusters:
        side += 1
    grid = itertools.islice(itertools.product(range(side), repeat=spec.dim), spec.clusters)
    return np.array(list(grid), dtype=float) * distance


def gen_synthetic(spec: SyntheticSpec, sigma: float = 1.0) -> Embeddings:
    """
    Gaussian blob embeddings

    Args:
        spec: Cluster layout, row assignment and seed
        sigma: RBF bandwidth attached to the result

    Returns:
        Embeddings of clusters * points_per_cluster points. With the clustered
        assignment cluster c occupies rows c*points_per_cluster ..
        (c+1)*points_per_cluster - 1; with the random assignment the rows are
        a seeded permutation of that layout.
    """
    vectors, _ = synthetic_points(spec)
    logger.info(f"Generated {vectors.shape[0]} points in {spec.clusters} clusters "
                f"(dim {spec.dim}, {spec.assignment} assignment)")
    return Embeddings(vectors, sigma)


def synthetic_points(spec: SyntheticSpec) -> Tuple[np.ndarray, np.ndarray]:
    """Blob coordinates and the cluster label of every row"""
    rng = stream_rng(spec.seed, DATA_STREAM)
    centers = _cluster_centers(spec)
    blocks = []
    for center in centers:
        noise = rng.standard_normal((spec.points_per_cluster, spec.dim))
        blocks.append(center + spec.cluster_spread * noise)
    vectors = np.vstack(blocks)
    labels = np.repeat(np.arange(spec.clusters), spec.points_per_cluster)
    if spec.assignment == 'random':
        order = rng.permutation(len(labels))
        vectors, labels = vectors[order], labels[order]
    return vectors, labels


def balanced_partition_sizes(n: int, N: int) -> List[int]:
    """Split n elements into N contiguous partitions whose sizes differ by at most one"""
    if N < 1 or n < N:
        raise ConstructionError(f"Cannot split {n} elements into {N} nonempty partitions")
    base, extra = divmod(n, N)
    return [base + 1 if i < extra else base for i in range(N)]


def write_eta_stats(stats: EtaStats, path: PathLike) -> Path:
    """Write eta_stats.csv: partition,t,eta_bar,sigma"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    rows = [(i, t, float(stats.eta_bar[t, i]), float(stats.sigma[i]))
            for i in range(stats.N) for t in range(stats.T)]
    pd.DataFrame(rows, columns=['partition', 't', 'eta_bar', 'sigma']).to_csv(path, index=False)
    logger.info(f"Ratio statistics written to {path}")
    return path


def load_eta_stats(path: PathLike) -> EtaStats:
    """
    Read eta_stats.csv back into EtaStats

    Args:
        path: CSV with partition,t,eta_bar,sigma covering every (partition, t) pair

    Returns:
        EtaStats with one sigma per partition
    """
    path = Path(path)
    frame = _read_table(path, 'statistics')
    if {'partition', 't', 'eta_bar', 'sigma'} - set(frame.columns):
        raise FormatError("header must be partition,t,eta_bar,sigma", str(path), 1)
    if frame.empty:
        raise FormatError("no statistics rows", str(path))

    N = int(frame['partition'].max()) + 1
    T = int(frame['t'].max()) + 1
    if len(frame) != N * T or frame.duplicated(subset=['partition', 't']).any():
        raise FormatError(f"expected one row per (partition, t) for {N} partitions x {T} iterations",
                          str(path))
    eta_bar = frame.pivot(index='t', columns='partition', values='eta_bar').sort_index().to_numpy()
    sigma_per_partition = frame.groupby('partition')['sigma']
    if (sigma_per_partition.nunique() > 1).any():
        raise FormatError("sigma must be constant within a partition", str(path))
    sigma = sigma_per_partition.first().sort_index().to_numpy()
    return EtaStats(eta_bar, sigma)
