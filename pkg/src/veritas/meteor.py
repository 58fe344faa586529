"""Unigram-alignment similarity between token sequences.

Two strings are tokenized, aligned one-to-one in two stages (exact surface
match first, Porter-stem match on the leftovers), and scored by a
precision/recall harmonic mean discounted by a fragmentation penalty. Among
all alignments that respect the stage quotas, the one with the fewest chunks
is chosen; a chunk is a maximal run of pairs contiguous and order-preserving
on both sides.
"""
from __future__ import annotations

import re
from bisect import bisect_right
from collections import Counter, defaultdict
from dataclasses import dataclass, field

from .errors import ValidationError
from .porter import porter_stem

_TOKEN_RE = re.compile(r"[^\W_]+")

_STAGES = ("exact", "stem")

# Backtracking budget for the chunk-minimizing search. The first descent
# always completes, so hitting the cap degrades to a near-greedy alignment
# instead of failing.
_NODE_CAP = 200_000


def tokenize(text: str) -> list[str]:
    """Lowercase and split on non-word characters; underscores split too."""
    return _TOKEN_RE.findall(text.lower())


@dataclass(frozen=True)
class MeteorParams:
    """Scoring knobs; defaults give Fmean = 10PR/(R+9P) and a 0.5*(c/m)^3 penalty."""

    fmean_recall_weight: float = 9.0
    penalty_gamma: float = 0.5
    penalty_beta: float = 3.0
    match_stages: tuple[str, ...] = _STAGES

    def __post_init__(self):
        if self.fmean_recall_weight <= 0:
            raise ValidationError("fmean_recall_weight must be positive")
        if not 0 <= self.penalty_gamma <= 1:
            raise ValidationError("penalty_gamma must be in [0, 1]")
        if self.penalty_beta <= 0:
            raise ValidationError("penalty_beta must be positive")
        stages = tuple(self.match_stages)
        if not stages or len(set(stages)) != len(stages):
            raise ValidationError("match_stages must be non-empty and unique")
        for s in stages:
            if s not in _STAGES:
                raise ValidationError(f"unknown match stage: {s!r}")
        if stages == ("stem", "exact"):
            # exact quotas are only well defined when the finer stage runs first
            raise ValidationError("stem stage cannot precede exact stage")
        object.__setattr__(self, "match_stages", stages)


DEFAULT_METEOR_PARAMS = MeteorParams()


@dataclass(frozen=True)
class Alignment:
    pairs: tuple[tuple[int, int], ...]  # (hyp index, ref index), sorted by hyp
    match_count: int
    chunk_count: int


def align_unigrams(
    hyp_tokens: list[str],
    ref_tokens: list[str],
    stages: tuple[str, ...] = _STAGES,
) -> Alignment:
    """Stage-priority one-to-one alignment with minimal chunk count.

    Exact matches take as many pairs as the surface multisets allow; stem
    matches are drawn from whatever is left. Subject to those quotas the
    pairing is chosen to minimize the number of chunks, deterministically.
    """
    MeteorParams(match_stages=tuple(stages))
    hyp = list(hyp_tokens)
    ref = list(ref_tokens)
    if not hyp or not ref:
        return Alignment((), 0, 0)
    use_exact = "exact" in stages
    use_stem = "stem" in stages

    h_surf = Counter(hyp)
    r_surf = Counter(ref)
    if use_exact:
        q_exact = {
            w: min(c, r_surf[w]) for w, c in h_surf.items() if w in r_surf
        }
    else:
        q_exact = {}

    stem_of: dict[str, str] = {}
    q_stem: dict[str, int] = {}
    h_stems: list[str] = []
    r_stems: list[str] = []
    if use_stem:
        for w in set(h_surf) | set(r_surf):
            stem_of[w] = porter_stem(w)
        h_stems = [stem_of[t] for t in hyp]
        r_stems = [stem_of[t] for t in ref]
        h_left: dict[str, int] = defaultdict(int)
        r_left: dict[str, int] = defaultdict(int)
        for w, c in h_surf.items():
            h_left[stem_of[w]] += c - q_exact.get(w, 0)
        for w, c in r_surf.items():
            r_left[stem_of[w]] += c - q_exact.get(w, 0)
        q_stem = {
            s: min(h_left[s], r_left[s])
            for s in h_left
            if h_left[s] > 0 and r_left.get(s, 0) > 0
        }

    total_m = sum(q_exact.values()) + sum(q_stem.values())
    if total_m == 0:
        return Alignment((), 0, 0)

    n = len(hyp)
    pos_h: dict[str, list[int]] = defaultdict(list)
    for i, w in enumerate(hyp):
        pos_h[w].append(i)
    refs_by_surf: dict[str, list[int]] = defaultdict(list)
    for j, t in enumerate(ref):
        refs_by_surf[t].append(j)
    refs_by_stem: dict[str, list[int]] = defaultdict(list)
    if use_stem:
        for j, s in enumerate(r_stems):
            refs_by_stem[s].append(j)
    h_group_surfs: dict[str, set[str]] = defaultdict(set)
    if use_stem:
        for w in h_surf:
            h_group_surfs[stem_of[w]].add(w)

    ref_used = [False] * len(ref)
    used_ref_surf: Counter = Counter()
    exact_made: Counter = Counter()
    stem_made: Counter = Counter()
    current: list[tuple[int, int]] = []

    best_pairs: tuple[tuple[int, int], ...] | None = None
    best_chunks = len(hyp) + len(ref) + 1
    nodes = 0
    budget_spent = False

    def future(w: str, i: int) -> int:
        ps = pos_h.get(w)
        if not ps:
            return 0
        return len(ps) - bisect_right(ps, i)

    def exact_ok_without(w: str, i: int) -> bool:
        need = q_exact.get(w, 0)
        return exact_made[w] + future(w, i) >= need

    def stem_capacity(s: str, i: int) -> int:
        cap = 0
        for w in h_group_surfs.get(s, ()):
            avail = future(w, i) - (q_exact.get(w, 0) - exact_made[w])
            if avail > 0:
                cap += avail
        return cap

    def stem_ok(s: str, i: int) -> bool:
        need = q_stem.get(s, 0)
        if stem_made[s] >= need:
            return True
        return stem_made[s] + stem_capacity(s, i) >= need

    def candidates(surfaces_or_stem: list[int], last: tuple[int, int] | None, i: int):
        cont = None
        if last is not None and last[0] == i - 1:
            cont = last[1] + 1
        ordered = []
        for j in surfaces_or_stem:
            if ref_used[j]:
                continue
            if j == cont:
                ordered.insert(0, j)
            else:
                ordered.append(j)
        return ordered, cont

    def search(i: int, chunks: int, last: tuple[int, int] | None) -> None:
        nonlocal best_pairs, best_chunks, nodes, budget_spent
        nodes += 1
        if nodes > _NODE_CAP:
            budget_spent = True
            return
        if i == n:
            if len(current) == total_m and chunks < best_chunks:
                best_chunks = chunks
                best_pairs = tuple(current)
            return
        w = hyp[i]
        s = h_stems[i] if use_stem else ""

        if use_exact and exact_made[w] < q_exact.get(w, 0):
            ordered, cont = candidates(refs_by_surf.get(w, []), last, i)
            for j in ordered:
                new_chunks = chunks if j == cont else chunks + 1
                if new_chunks >= best_chunks:
                    continue
                ref_used[j] = True
                used_ref_surf[w] += 1
                exact_made[w] += 1
                current.append((i, j))
                if not use_stem or stem_ok(s, i):
                    search(i + 1, new_chunks, (i, j))
                current.pop()
                exact_made[w] -= 1
                used_ref_surf[w] -= 1
                ref_used[j] = False
                if budget_spent:
                    return

        if (
            use_stem
            and stem_made[s] < q_stem.get(s, 0)
            and exact_ok_without(w, i)
        ):
            ordered, cont = candidates(refs_by_stem.get(s, []), last, i)
            for j in ordered:
                t = ref[j]
                free = len(refs_by_surf.get(t, ())) - used_ref_surf[t]
                if free - 1 < q_exact.get(t, 0) - exact_made[t]:
                    continue  # ref copy reserved for an exact pair
                new_chunks = chunks if j == cont else chunks + 1
                if new_chunks >= best_chunks:
                    continue
                ref_used[j] = True
                used_ref_surf[t] += 1
                stem_made[s] += 1
                current.append((i, j))
                search(i + 1, new_chunks, (i, j))
                current.pop()
                stem_made[s] -= 1
                used_ref_surf[t] -= 1
                ref_used[j] = False
                if budget_spent:
                    return

        if exact_ok_without(w, i) and (not use_stem or stem_ok(s, i)):
            search(i + 1, chunks, last)

    search(0, 0, None)
    assert best_pairs is not None and len(best_pairs) == total_m
    return Alignment(best_pairs, total_m, best_chunks)


def meteor(
    hypothesis: str,
    reference: str,
    params: MeteorParams = DEFAULT_METEOR_PARAMS,
) -> float:
    """Alignment score in [0, 1]; 0 when either side is empty or nothing matches."""
    hyp = tokenize(hypothesis)
    ref = tokenize(reference)
    if not hyp or not ref:
        return 0.0
    aligned = align_unigrams(hyp, ref, params.match_stages)
    m = aligned.match_count
    if m == 0:
        return 0.0
    precision = m / len(hyp)
    recall = m / len(ref)
    w = params.fmean_recall_weight
    fmean = (w + 1) * precision * recall / (recall + w * precision)
    penalty = params.penalty_gamma * (aligned.chunk_count / m) ** params.penalty_beta
    return fmean * (1.0 - penalty)
