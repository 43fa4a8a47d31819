"""Freely reduced words in abstract generators, run-length encoded.

A word is stored as a tuple of (generator index, exponent) runs with
nonzero exponents and no two adjacent runs on the same generator.  The
quasi-relators and census relators are full of powers, so downstream
evaluation works run by run with binary exponentiation.
"""

from __future__ import annotations

from typing import Iterable, Sequence


class WordError(ValueError):
    pass


def _reduce_runs(runs: Iterable[tuple[int, int]]) -> tuple[tuple[int, int], ...]:
    stack: list[list[int]] = []
    for gen, exp in runs:
        if exp == 0:
            continue
        if stack and stack[-1][0] == gen:
            stack[-1][1] += exp
            if stack[-1][1] == 0:
                stack.pop()
        else:
            stack.append([gen, exp])
    return tuple((g, e) for g, e in stack)


class Word:
    """A freely reduced word; empty tuple is the identity."""

    __slots__ = ("letters",)

    def __init__(self, runs: Iterable[tuple[int, int]] = ()):
        self.letters = _reduce_runs(runs)

    def __iter__(self):
        return iter(self.letters)

    def __len__(self):
        return len(self.letters)

    def __eq__(self, other):
        return isinstance(other, Word) and self.letters == other.letters

    def __hash__(self):
        return hash(self.letters)

    def __repr__(self):
        return f"Word({list(self.letters)})"

    def __mul__(self, other: "Word") -> "Word":
        return Word(self.letters + other.letters)

    def __pow__(self, n: int) -> "Word":
        if n == 0:
            return Word()
        base = self if n > 0 else self.inverse()
        return Word(base.letters * abs(n))

    def inverse(self) -> "Word":
        return Word((g, -e) for g, e in reversed(self.letters))

    def is_empty(self) -> bool:
        return not self.letters

    def letter_count(self) -> int:
        return sum(abs(e) for _, e in self.letters)

    def exponent_sum(self, gen: int) -> int:
        return sum(e for g, e in self.letters if g == gen)

    def generators_used(self) -> set[int]:
        return {g for g, _ in self.letters}

    def substitute(self, images: Sequence["Word"]) -> "Word":
        """Replace generator i by images[i] (a Word over other generators)."""
        out = Word()
        for g, e in self.letters:
            out = out * images[g] ** e
        return out

    def split_half(self) -> tuple["Word", "Word"]:
        """Split into u, v with w = u*v and u carrying ceil(half) of the letters."""
        total = self.letter_count()
        cut = (total + 1) // 2
        left: list[tuple[int, int]] = []
        right: list[tuple[int, int]] = []
        seen = 0
        for g, e in self.letters:
            step = abs(e)
            if seen >= cut:
                right.append((g, e))
            elif seen + step <= cut:
                left.append((g, e))
            else:
                take = cut - seen
                sign = 1 if e > 0 else -1
                left.append((g, sign * take))
                right.append((g, sign * (step - take)))
            seen += step
        return Word(left), Word(right)


def invert_word(w: Word) -> Word:
    return w.inverse()


def parse_word(text: str, generators: Sequence[str]) -> Word:
    """Parse `word := term+ ; term := (gen | '(' word ')') ('^' int)?`.

    Generator names are single letters; `x^-1` is the usual inverse
    shorthand.  Parenthesized subwords are expanded by repetition.
    """
    gen_index = {name: i for i, name in enumerate(generators)}
    for name in generators:
        if len(name) != 1:
            raise WordError(f"generator names must be single letters, got {name!r}")
    s = text.replace(" ", "")
    pos = 0

    def parse_int() -> int:
        nonlocal pos
        start = pos
        if pos < len(s) and s[pos] in "+-":
            pos += 1
        if pos >= len(s) or not s[pos].isdigit():
            raise WordError(f"malformed exponent at position {start} in {text!r}")
        while pos < len(s) and s[pos].isdigit():
            pos += 1
        return int(s[start:pos])

    def parse_seq(depth: int) -> Word:
        nonlocal pos
        out = Word()
        while pos < len(s):
            ch = s[pos]
            if ch == ")":
                if depth == 0:
                    raise WordError(f"unbalanced ')' at position {pos} in {text!r}")
                return out
            if ch == "(":
                pos += 1
                inner = parse_seq(depth + 1)
                if pos >= len(s) or s[pos] != ")":
                    raise WordError(f"unbalanced '(' in {text!r}")
                pos += 1
                term = inner
            elif ch in gen_index:
                pos += 1
                term = Word([(gen_index[ch], 1)])
            else:
                raise WordError(f"unknown generator {ch!r} at position {pos} in {text!r}")
            if pos < len(s) and s[pos] == "^":
                pos += 1
                term = term ** parse_int()
            out = out * term
        return out

    result = parse_seq(0)
    if pos != len(s):
        raise WordError(f"trailing input at position {pos} in {text!r}")
    return result


def render_word(w: Word, generators: Sequence[str]) -> str:
    """Inverse of parse_word on freely reduced words."""
    if w.is_empty():
        return ""
    parts = []
    for g, e in w.letters:
        name = generators[g]
        parts.append(name if e == 1 else f"{name}^{e}")
    return "".join(parts)
