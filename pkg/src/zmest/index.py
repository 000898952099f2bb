"""Substring-membership index over a fixed text.

The production backend is a suffix automaton built online in
``O(N * |A|)`` time and space.  Every substring of the text is a path from the
root, so growing a left-anchored query one symbol at a time costs one
transition lookup.  :class:`SuffixArrayIndex` answers the same queries by
binary search over sorted suffixes; it is a slow cross-check for tests.
"""
from __future__ import annotations

import bisect
import hashlib
import itertools
import time
from dataclasses import dataclass

from .errors import AlphabetMismatchError, ContractViolation, StructuralError
from .symbols import Alphabet, SymbolSequence

_ids = itertools.count(1)


@dataclass(frozen=True)
class MatchState:
    """Position of a growing query inside an index.  ``node == -1`` after a failed extension."""

    index_id: int
    node: int
    length: int

    @property
    def failed(self) -> bool:
        return self.node < 0


class SubstringIndex:
    """Suffix automaton of ``x``.  Immutable once built."""

    def __init__(self, x: SymbolSequence):
        if len(x) == 0:
            raise StructuralError("cannot index an empty sequence")
        start = time.perf_counter()
        self.alphabet: Alphabet = x.alphabet
        self.source_length = len(x)
        self.id = next(_ids)
        self.source_digest = sequence_digest(x)
        self._trans = _build_automaton(x.tolist())
        self.build_seconds = time.perf_counter() - start

    @property
    def node_count(self) -> int:
        return len(self._trans)

    @property
    def transitions(self) -> list[dict[int, int]]:
        """Raw transition table (node -> {symbol: node}); node 0 is the root.  Do not mutate."""
        return self._trans

    def contains(self, w: SymbolSequence) -> bool:
        _check_alphabet(self.alphabet, w)
        trans = self._trans
        node = 0
        for c in w.tolist():
            node = trans[node].get(c)
            if node is None:
                return False
        return True

    __contains__ = contains

    def initial_state(self) -> MatchState:
        return MatchState(self.id, 0, 0)

    def extend_match(self, state: MatchState, symbol: int) -> tuple[bool, MatchState]:
        """Extend the query behind ``state`` by one symbol; O(1)."""
        if state.index_id != self.id:
            raise ContractViolation("match state belongs to a different index")
        if state.failed:
            raise ContractViolation("cannot extend a match state after a failed extension")
        if not 0 <= symbol < self.alphabet.size:
            raise StructuralError(f"symbol index {symbol} out of range")
        nxt = self._trans[state.node].get(symbol)
        if nxt is None:
            return False, MatchState(self.id, -1, state.length + 1)
        return True, MatchState(self.id, nxt, state.length + 1)

    def __repr__(self):
        return f"<SubstringIndex N={self.source_length} nodes={self.node_count}>"


def sequence_digest(x: SymbolSequence) -> str:
    return hashlib.blake2b(x.data.tobytes(), digest_size=16).hexdigest()


def _check_alphabet(alphabet: Alphabet, w: SymbolSequence) -> None:
    if w.alphabet != alphabet:
        raise AlphabetMismatchError(
            f"query alphabet {list(w.alphabet.symbols)} differs from index alphabet {list(alphabet.symbols)}"
        )


def _build_automaton(text: list[int]) -> list[dict[int, int]]:
    link = [-1]
    length = [0]
    trans: list[dict[int, int]] = [{}]
    last = 0
    for c in text:
        cur = len(length)
        length.append(length[last] + 1)
        link.append(0)
        trans.append({})
        p = last
        while p != -1 and c not in trans[p]:
            trans[p][c] = cur
            p = link[p]
        if p != -1:
            q = trans[p][c]
            if length[p] + 1 == length[q]:
                link[cur] = q
            else:
                clone = len(length)
                length.append(length[p] + 1)
                link.append(link[q])
                trans.append(trans[q].copy())
                while p != -1 and trans[p].get(c) == q:
                    trans[p][c] = clone
                    p = link[p]
                link[q] = clone
                link[cur] = clone
        last = cur
    return trans


def build_index(x: SymbolSequence) -> SubstringIndex:
    return SubstringIndex(x)


def contains(index: SubstringIndex, w: SymbolSequence) -> bool:
    return index.contains(w)


def extend_match(index: SubstringIndex, state: MatchState, symbol: int) -> tuple[bool, MatchState]:
    return index.extend_match(state, symbol)


class SuffixArrayIndex:
    """Sorted-suffix membership index with the same query surface.  ``O(N^2 log N)`` build."""

    def __init__(self, x: SymbolSequence):
        if len(x) == 0:
            raise StructuralError("cannot index an empty sequence")
        self.alphabet = x.alphabet
        self.source_length = len(x)
        self._text = tuple(x.tolist())
        self._suffixes = sorted(self._text[i:] for i in range(len(self._text)))

    def contains(self, w: SymbolSequence) -> bool:
        _check_alphabet(self.alphabet, w)
        key = tuple(w.tolist())
        if not key:
            return True
        i = bisect.bisect_left(self._suffixes, key)
        return i < len(self._suffixes) and self._suffixes[i][: len(key)] == key

    __contains__ = contains
