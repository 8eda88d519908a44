"""Exhaustive subset enumeration with vectorised per-member losses.

Subsets of an agent list ``agents`` (sorted) are encoded as local bitmasks,
bit ``j`` standing for ``agents[j]``. Because ``agents`` is sorted, ordering
by local mask and by global mask agree, so "lowest mask" tie-breaking is the
same in both encodings.

Loss tables are built with the doubling recurrence
``T[m | 1<<b] = combine(T[m], d[:, b])`` over the low bits, and the high bits
are folded in chunk by chunk to keep memory bounded.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np

from .metric import LossKind, LossModel, ModelIncompleteError

MAX_ENUM_AGENTS = 22
LOW_BITS = 16


class EnumerationCapError(ValueError):
    pass


@dataclass
class SubsetChunk:
    local_masks: np.ndarray  # int64, increasing
    sizes: np.ndarray  # int64
    members: np.ndarray  # bool (m, len(agents))
    losses: np.ndarray  # float (m, len(agents)); only meaningful where members


def _bit_matrix(masks: np.ndarray, width: int) -> np.ndarray:
    return ((masks[:, None] >> np.arange(width, dtype=np.int64)) & 1).astype(bool)


def _low_tables(d: np.ndarray, low: int, kind: LossKind):
    """Sum (or max) of ``d[:, j]`` over members j of each low mask."""
    m = d.shape[0]
    acc = np.zeros((1 << low, m))
    for b in range(low):
        lo, hi = 1 << b, 1 << (b + 1)
        if kind is LossKind.AVERAGE:
            acc[lo:hi] = acc[0:lo] + d[:, b]
        else:
            acc[lo:hi] = np.maximum(acc[0:lo], d[:, b])
    return acc


def check_cap(count: int, cap: int = MAX_ENUM_AGENTS) -> None:
    if count > cap:
        raise EnumerationCapError(f"exhaustive enumeration capped at {cap} agents, got {count}")


def iter_subsets(model: LossModel, agents: Sequence[int], cap: int = MAX_ENUM_AGENTS) -> Iterator[SubsetChunk]:
    """All nonempty and empty subsets of ``agents`` in increasing mask order."""
    agents = list(agents)
    m = len(agents)
    check_cap(m, cap)
    low = min(m, LOW_BITS)
    high = m - low
    low_masks = np.arange(1 << low, dtype=np.int64)
    low_bits = _bit_matrix(low_masks, low)
    low_sizes = low_bits.sum(axis=1)

    if model.kind is LossKind.ARBITRARY:
        yield from _iter_arbitrary(model, agents, low, high, low_masks, low_bits, low_sizes)
        return

    idx = np.asarray(agents)
    d = model.metric.dist[np.ix_(idx, idx)]
    low_acc = _low_tables(d[:, :low], low, model.kind)
    for h in range(1 << high):
        hbits = np.array([(h >> j) & 1 for j in range(high)], dtype=bool)
        hcols = d[:, low:][:, hbits]
        if model.kind is LossKind.AVERAGE:
            acc = low_acc + hcols.sum(axis=1)
        else:
            acc = np.maximum(low_acc, hcols.max(axis=1)) if hcols.shape[1] else low_acc
        sizes = low_sizes + int(hbits.sum())
        members = np.concatenate([low_bits, np.broadcast_to(hbits, (1 << low, high))], axis=1)
        if model.kind is LossKind.AVERAGE:
            with np.errstate(invalid="ignore", divide="ignore"):
                losses = acc / sizes[:, None]
        else:
            losses = acc
        yield SubsetChunk((np.int64(h) << low) | low_masks, sizes, members, losses)


def _iter_arbitrary(model, agents, low, high, low_masks, low_bits, low_sizes):
    m = len(agents)
    weights = np.array([1 << a for a in agents], dtype=np.int64)
    table = model.table
    for h in range(1 << high):
        hbits = np.array([(h >> j) & 1 for j in range(high)], dtype=bool)
        members = np.concatenate([low_bits, np.broadcast_to(hbits, (1 << low, high))], axis=1)
        gmasks = members.astype(np.int64) @ weights
        losses = np.zeros((1 << low, m))
        for r in range(1 << low):
            g = int(gmasks[r])
            if g == 0:
                continue
            for j in np.flatnonzero(members[r]):
                try:
                    losses[r, j] = table[(agents[j], g)]
                except KeyError:
                    raise ModelIncompleteError(f"no loss for agent {agents[j]} and mask {g:#b}") from None
        yield SubsetChunk((np.int64(h) << low) | low_masks, low_sizes + int(hbits.sum()), members, losses)


def local_to_agents(agents: Sequence[int], local_mask: int) -> frozenset[int]:
    return frozenset(a for j, a in enumerate(agents) if (local_mask >> j) & 1)


def max_member_loss(chunk: SubsetChunk) -> np.ndarray:
    """``max_{i in S} l_i(S)`` per row (``-inf`` for the empty set)."""
    return np.where(chunk.members, chunk.losses, -np.inf).max(axis=1)
