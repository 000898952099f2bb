"""Alphabets and symbol sequences, plus the plain-text sequence file format.

Sequences store symbol *indices* (``uint16``) into an :class:`Alphabet`.
Python-style slicing is 0-based and half-open; :meth:`SymbolSequence.substring`
uses the 1-based inclusive ``x_k^l`` convention.
"""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import AlphabetMismatchError, StructuralError

MAX_ALPHABET_SIZE = 65535


@dataclass(frozen=True)
class Alphabet:
    symbols: tuple[str, ...]

    def __post_init__(self):
        symbols = tuple(str(s) for s in self.symbols)
        object.__setattr__(self, "symbols", symbols)
        if len(symbols) < 1:
            raise StructuralError("alphabet must contain at least one symbol")
        if len(set(symbols)) != len(symbols):
            raise StructuralError(f"alphabet symbols are not distinct: {list(symbols)}")
        if len(symbols) > MAX_ALPHABET_SIZE:
            raise StructuralError(f"alphabet larger than {MAX_ALPHABET_SIZE} symbols")
        if any(s == "" or any(ch.isspace() for ch in s) for s in symbols):
            raise StructuralError("symbols must be nonempty and contain no whitespace")

    @property
    def size(self) -> int:
        return len(self.symbols)

    @property
    def single_char(self) -> bool:
        return all(len(s) == 1 for s in self.symbols)

    def index(self, token: str) -> int:
        try:
            return self.symbols.index(token)
        except ValueError:
            raise StructuralError(f"unknown symbol {token!r}") from None

    def encode(self, text: str | Iterable[str]) -> "SymbolSequence":
        """Build a sequence from text.

        Single-character alphabets read one symbol per character (whitespace
        ignored); otherwise ``text`` is split on whitespace.
        """
        if isinstance(text, str):
            tokens = [ch for ch in text if not ch.isspace()] if self.single_char else text.split()
        else:
            tokens = list(text)
        lookup = {s: i for i, s in enumerate(self.symbols)}
        try:
            data = [lookup[t] for t in tokens]
        except KeyError as exc:
            raise StructuralError(f"unknown symbol {exc.args[0]!r}") from None
        return SymbolSequence(self, np.asarray(data, dtype=np.uint16))


BINARY = Alphabet(("0", "1"))


class SymbolSequence:
    """Immutable string over an alphabet."""

    __slots__ = ("alphabet", "data")

    def __init__(self, alphabet: Alphabet, data: Sequence[int] | np.ndarray):
        arr = np.array(data, dtype=np.int64).ravel()
        if arr.size and (arr.min() < 0 or arr.max() >= alphabet.size):
            raise StructuralError(f"symbol index out of range for alphabet of size {alphabet.size}")
        arr = arr.astype(np.uint16)
        arr.flags.writeable = False
        object.__setattr__(self, "alphabet", alphabet)
        object.__setattr__(self, "data", arr)

    def __setattr__(self, name, value):
        raise AttributeError("SymbolSequence is immutable")

    def __len__(self) -> int:
        return int(self.data.size)

    def __getitem__(self, item):
        if isinstance(item, slice):
            return SymbolSequence(self.alphabet, self.data[item])
        return int(self.data[item])

    def __eq__(self, other):
        if not isinstance(other, SymbolSequence):
            return NotImplemented
        return self.alphabet == other.alphabet and np.array_equal(self.data, other.data)

    def __hash__(self):
        return hash((self.alphabet, self.data.tobytes()))

    def __add__(self, other: "SymbolSequence") -> "SymbolSequence":
        check_same_alphabet(self, other)
        return SymbolSequence(self.alphabet, np.concatenate([self.data, other.data]))

    def __repr__(self):
        text = self.to_text()
        if len(text) > 40:
            text = text[:37] + "..."
        return f"SymbolSequence({text!r}, N={len(self)})"

    def substring(self, k: int, l: int) -> "SymbolSequence":
        """Return ``x_k^l`` (1-based, inclusive)."""
        if not 1 <= k <= l <= len(self):
            raise IndexError(f"invalid substring bounds k={k}, l={l} for length {len(self)}")
        return SymbolSequence(self.alphabet, self.data[k - 1 : l])

    def tolist(self) -> list[int]:
        return self.data.tolist()

    def to_text(self) -> str:
        syms = self.alphabet.symbols
        sep = "" if self.alphabet.single_char else " "
        return sep.join(syms[i] for i in self.data.tolist())


def check_same_alphabet(*seqs) -> Alphabet:
    first = seqs[0].alphabet
    for s in seqs[1:]:
        if s.alphabet != first:
            raise AlphabetMismatchError(
                f"alphabet mismatch: {list(first.symbols)} vs {list(s.alphabet.symbols)}"
            )
    return first


def read_sequence(path: str | Path, alphabet: Alphabet) -> SymbolSequence:
    text = Path(path).read_text(encoding="utf-8")
    return alphabet.encode(text)


def write_sequence(path: str | Path, seq: SymbolSequence) -> None:
    Path(path).write_text(seq.to_text() + "\n", encoding="utf-8")
