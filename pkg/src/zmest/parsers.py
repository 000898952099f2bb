"""Sequential parsings of ``y`` driven by substring membership in ``x``.

* mZM: each word is the shortest prefix of the unparsed remainder of ``y``
  that does not occur in ``x``.  The loop mirrors the textbook pseudocode
  exactly, including its treatment of the final word.
* ZM: same loop, but a failed extension of a nonempty match closes the
  longest found word and retries the failing symbol as the start of the
  next word.  A single unfound symbol is consumed as its own word.
* LZ78: incremental self-parsing of ``y`` into previously unseen phrases.

All boundaries are 1-based word start positions.
"""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass

from .errors import ContractViolation, StructuralError
from .index import SubstringIndex, build_index, sequence_digest
from .symbols import SymbolSequence, check_same_alphabet

VARIANTS = ("mZM", "ZM", "LZ78")

# Number of parse calls by variant.  Lets callers check that a run does not
# parse the same (y, x) pair twice.
PARSE_CALLS: Counter = Counter()


@dataclass(frozen=True)
class ParseResult:
    variant: str
    boundaries: tuple[int, ...]
    y: SymbolSequence

    @property
    def c(self) -> int:
        return len(self.boundaries)

    @property
    def N(self) -> int:
        return len(self.y)

    def word_lengths(self) -> list[int]:
        ends = list(self.boundaries[1:]) + [self.N + 1]
        return [e - b for b, e in zip(self.boundaries, ends)]

    def words(self) -> list[SymbolSequence]:
        ends = list(self.boundaries[1:]) + [self.N + 1]
        return [self.y.substring(b, e - 1) for b, e in zip(self.boundaries, ends)]

    def max_word_length(self) -> int:
        return max(self.word_lengths())

    def to_dict(self) -> dict:
        return {"variant": self.variant, "c": self.c, "boundaries": list(self.boundaries)}


def _index_for(x: SymbolSequence, index: SubstringIndex | None) -> SubstringIndex:
    if index is None:
        return build_index(x)
    if index.source_length != len(x) or index.source_digest != sequence_digest(x):
        raise ContractViolation("supplied index was not built from x")
    return index


def _check_pair(y: SymbolSequence, x: SymbolSequence, equal_lengths: bool) -> None:
    check_same_alphabet(y, x)
    if len(y) == 0 or len(x) == 0:
        raise StructuralError("sequences must be nonempty")
    if equal_lengths and len(y) != len(x):
        raise StructuralError(f"length mismatch: |y|={len(y)} but |x|={len(x)}")


def _mzm_boundaries(ysyms: list[int], trans: list[dict[int, int]]) -> list[int]:
    bounds = [1]
    node = 0
    # 0-based j here is the 1-based j of the pseudocode minus one; y_N is never tested
    for j in range(len(ysyms) - 1):
        nxt = trans[node].get(ysyms[j])
        if nxt is None:
            bounds.append(j + 2)
            node = 0
        else:
            node = nxt
    return bounds


def _zm_boundaries(ysyms: list[int], trans: list[dict[int, int]]) -> list[int]:
    bounds = [1]
    node = 0
    j = 0
    last = len(ysyms) - 1
    while j < last:
        nxt = trans[node].get(ysyms[j])
        if nxt is not None:
            node = nxt
            j += 1
        elif node == 0:
            # i == j: the unfound symbol is a word by itself
            bounds.append(j + 2)
            j += 1
        else:
            # close the longest found word; y_j starts the next one
            bounds.append(j + 1)
            node = 0
    return bounds


def mzm_parse(y: SymbolSequence, x: SymbolSequence, index: SubstringIndex | None = None) -> ParseResult:
    """mZM parsing of ``y_1^N`` with respect to ``x_1^N`` (equal lengths required)."""
    _check_pair(y, x, equal_lengths=True)
    return mzm_parse_unchecked(y, x, index)


def mzm_parse_unchecked(y, x, index=None) -> ParseResult:
    """mZM parsing without the equal-length requirement."""
    _check_pair(y, x, equal_lengths=False)
    idx = _index_for(x, index)
    PARSE_CALLS["mZM"] += 1
    return ParseResult("mZM", tuple(_mzm_boundaries(y.tolist(), idx.transitions)), y)


def zm_parse(y: SymbolSequence, x: SymbolSequence, index: SubstringIndex | None = None) -> ParseResult:
    """Original ZM parsing (longest words found in ``x``); equal lengths required."""
    _check_pair(y, x, equal_lengths=True)
    return zm_parse_unchecked(y, x, index)


def zm_parse_unchecked(y, x, index=None) -> ParseResult:
    _check_pair(y, x, equal_lengths=False)
    idx = _index_for(x, index)
    PARSE_CALLS["ZM"] += 1
    return ParseResult("ZM", tuple(_zm_boundaries(y.tolist(), idx.transitions)), y)


def lz78_parse(y: SymbolSequence) -> ParseResult:
    """Textbook LZ78 incremental parsing; the last phrase may repeat an earlier one."""
    if len(y) == 0:
        raise StructuralError("cannot parse an empty sequence")
    A = y.alphabet.size
    trie: dict[int, int] = {}
    next_id = 1
    node = 0
    bounds = [1]
    ysyms = y.tolist()
    last = len(ysyms) - 1
    for j, c in enumerate(ysyms):
        key = node * A + c
        child = trie.get(key)
        if child is None:
            trie[key] = next_id
            next_id += 1
            node = 0
            if j < last:
                bounds.append(j + 2)
        else:
            node = child
    PARSE_CALLS["LZ78"] += 1
    return ParseResult("LZ78", tuple(bounds), y)


def longest_match(
    z: SymbolSequence, x: SymbolSequence, N: int | None = None, index: SubstringIndex | None = None
) -> int:
    """Length of the longest prefix of ``z`` occurring in ``x_1^N`` (0 if none)."""
    check_same_alphabet(z, x)
    if len(z) == 0:
        raise StructuralError("z must be nonempty")
    N = len(x) if N is None else N
    if not 1 <= N <= len(x):
        raise StructuralError(f"horizon N={N} must lie in [1, {len(x)}]")
    idx = _index_for(x[:N], index)
    trans = idx.transitions
    node = 0
    matched = 0
    for c in z.tolist()[:N]:
        node = trans[node].get(c)
        if node is None:
            break
        matched += 1
    return matched


def waiting_time(a: SymbolSequence, x: SymbolSequence) -> int | None:
    """First 1-based position ``r`` with ``x_r^{r+|a|-1} == a``, or ``None``."""
    check_same_alphabet(a, x)
    if len(a) == 0:
        raise StructuralError("a must be nonempty")
    if len(a) > len(x):
        return None
    if x.alphabet.size <= 256:
        pos = x.data.astype("u1").tobytes().find(a.data.astype("u1").tobytes())
        return None if pos < 0 else pos + 1
    needle = a.tolist()
    hay = x.tolist()
    m = len(needle)
    for r in range(len(hay) - m + 1):
        if hay[r : r + m] == needle:
            return r + 1
    return None
