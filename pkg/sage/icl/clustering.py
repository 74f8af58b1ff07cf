# Copyright (c) 2025 SAGE contributors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#   http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
"""k-medoids (PAM) over z-normalized segments with silhouette model selection."""

from typing import List, NamedTuple, Tuple

import numpy as np
from sklearn.metrics import pairwise_distances, silhouette_score

from sage.config import ICL_CONFIG
from sage.utils.file_utils import logging


class Clustering(NamedTuple):
    medoids: Tuple[int, ...]
    labels: np.ndarray
    cost: float
    silhouette: float


def _assign(dist: np.ndarray, medoids: List[int]) -> Tuple[np.ndarray, float]:
    sub = dist[medoids]
    labels = np.argmin(sub, axis=0)
    return labels, float(np.sum(sub[labels, np.arange(dist.shape[0])]))


def pam(dist: np.ndarray, k: int, max_iter: int = 100) -> Tuple[List[int], np.ndarray, float]:
    """Partitioning around medoids on a precomputed distance matrix.

    BUILD adds medoids greedily by total-cost reduction, SWAP then applies the
    best improving (medoid, non-medoid) exchange until none is left. Ties go
    to the lowest index, so the result is a pure function of ``dist``.
    """
    n = dist.shape[0]
    assert 1 <= k <= n, 'k={} for {} points'.format(k, n)
    medoids = [int(np.argmin(dist.sum(axis=1)))]
    nearest = dist[medoids[0]].copy()
    while len(medoids) < k:
        gain = np.maximum(nearest[None, :] - dist, 0.0).sum(axis=1)
        gain[medoids] = -1.0
        best = int(np.argmax(gain))
        medoids.append(best)
        nearest = np.minimum(nearest, dist[best])
    labels, cost = _assign(dist, medoids)
    for _ in range(max_iter):
        best_cost, best_swap = cost, None
        for slot in range(k):
            others = medoids[:slot] + medoids[slot + 1:]
            without = dist[others].min(axis=0) if others else np.full(n, np.inf)
            costs = np.minimum(dist, without[None, :]).sum(axis=1)
            costs[medoids] = np.inf
            o = int(np.argmin(costs))
            if costs[o] < best_cost - 1e-12:
                best_cost, best_swap = float(costs[o]), (slot, o)
        if best_swap is None:
            break
        medoids[best_swap[0]] = best_swap[1]
        labels, cost = _assign(dist, medoids)
    return medoids, labels, cost


def select_medoids(segments: np.ndarray, max_clusters: int = ICL_CONFIG['max_clusters']) -> Clustering:
    """Run PAM for every k in ``[2, min(max_clusters, N // 2)]`` and keep the best mean silhouette.

    Euclidean distance over the rows of ``segments``; ties favour the smaller k.
    """
    n = segments.shape[0]
    assert n >= 4, 'need at least 4 segments to cluster, got {}'.format(n)
    dist = pairwise_distances(segments, metric='euclidean')
    best = None
    for k in range(2, min(max_clusters, n // 2) + 1):
        medoids, labels, cost = pam(dist, k)
        if len(np.unique(labels)) < 2:
            continue
        score = float(silhouette_score(dist, labels, metric='precomputed'))
        logging.debug('k-medoids k={} cost={:.4g} silhouette={:.4f}'.format(k, cost, score))
        if best is None or score > best.silhouette:
            best = Clustering(medoids=tuple(medoids), labels=labels, cost=cost, silhouette=score)
    if best is None:
        # every segment identical: a single medoid covers the set
        medoids, labels, cost = pam(dist, 1)
        best = Clustering(medoids=tuple(medoids), labels=labels, cost=cost, silhouette=0.0)
    logging.info('selected {} prototypes from {} segments (silhouette {:.3f})'.format(
        len(best.medoids), n, best.silhouette))
    return best
