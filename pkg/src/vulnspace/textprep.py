"""Cleaning, normalization, and tokenization of vulnerability descriptions.

The rule set is fixed and versioned so embeddings stay reproducible:

* Unicode NFC, then lowercasing (CVE identifiers are uppercased instead).
* URLs are replaced by their hostname token.
* Version strings of shape digits(.digits)+ collapse to the ``<version>``
  token.
* Punctuation runs are split into separate tokens, except ``.``, ``/`` and
  ``-`` sandwiched between alphanumerics (filenames, hostnames, hyphenated
  terms) and except inside preserved identifiers (CVE ids, ``<version>``).

Each rule class can be disabled individually for ablation runs.
"""

from __future__ import annotations

import re
import unicodedata
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable

RULESET_VERSION = 1

URL_RE = re.compile(r"https?://([^\s/?#]+)[^\s]*", re.IGNORECASE)
CVE_TOKEN_RE = re.compile(r"cve-\d{4}-\d{4,}", re.IGNORECASE)
VERSION_RE = re.compile(r"\d+(\.\d+)+")
VERSION_TOKEN = "<version>"

# Telegraphic description style: only a small function-word list is dropped,
# so acronyms and domain terms survive.
STOPWORDS = frozenset("""
a an the and or but if then than of at by for with about against between
into through during before after above below to from up down in out on off
over under again is are was were be been being has have had do does did
it its this that these those as such via
""".split())


@dataclass(frozen=True)
class NormalizeConfig:
    lowercase: bool = True
    url_to_host: bool = True
    version_token: bool = True
    split_punctuation: bool = True
    keep_cve_ids: bool = True


@dataclass(frozen=True)
class TokenSequence:
    tokens: tuple[str, ...]
    dropped_count: int = 0

    def __post_init__(self):
        for t in self.tokens:
            if not t or any(ch.isspace() for ch in t):
                raise ValueError(f"bad token {t!r}")
        if self.dropped_count < 0:
            raise ValueError("dropped_count must be >= 0")


class PhraseLexicon:
    """Multi-word composite terms with a canonical underscore-joined form.

    Lookup is case-insensitive; every phrase has at least two words.
    """

    def __init__(self, phrases: Iterable[str] = ()):
        # first word -> word tuples, longest first for greedy matching
        self._by_head: dict[str, list[tuple[str, ...]]] = {}
        self._count = 0
        for phrase in phrases:
            words = tuple(phrase.lower().split())
            if len(words) < 2:
                raise ValueError(f"phrase needs >= 2 words: {phrase!r}")
            bucket = self._by_head.setdefault(words[0], [])
            if words not in bucket:
                bucket.append(words)
                self._count += 1
        for bucket in self._by_head.values():
            bucket.sort(key=len, reverse=True)

    def __len__(self) -> int:
        return self._count

    def match_at(self, tokens: tuple[str, ...] | list[str], start: int) -> int:
        """Length of the longest phrase starting at tokens[start], or 0."""
        head = tokens[start].lower()
        for words in self._by_head.get(head, ()):
            end = start + len(words)
            if end <= len(tokens) and \
                    tuple(t.lower() for t in tokens[start:end]) == words:
                return len(words)
        return 0

    @classmethod
    def from_file(cls, path: str | Path) -> "PhraseLexicon":
        phrases = []
        for line in Path(path).read_text(encoding="utf-8").splitlines():
            line = line.split("#", 1)[0].strip()
            if line:
                phrases.append(line)
        return cls(phrases)


def default_lexicon() -> PhraseLexicon:
    from importlib.resources import files
    return PhraseLexicon.from_file(files("vulnspace").joinpath("data/phrases.txt"))


def _is_word_char(ch: str) -> bool:
    return ch.isalnum() or ch == "_"


_JOINERS = {".", "/", "-"}


def _split_chunk(chunk: str) -> list[str]:
    """Split one whitespace-delimited chunk into word and punctuation-run tokens."""
    tokens: list[str] = []
    current = ""
    current_is_word = True
    for i, ch in enumerate(chunk):
        word_char = _is_word_char(ch)
        if not word_char and ch in _JOINERS:
            prev_ok = i > 0 and _is_word_char(chunk[i - 1])
            next_ok = i + 1 < len(chunk) and _is_word_char(chunk[i + 1])
            word_char = prev_ok and next_ok
        if current and word_char != current_is_word:
            tokens.append(current)
            current = ""
        current += ch
        current_is_word = word_char
    if current:
        tokens.append(current)
    return tokens


def normalize(description: str, cfg: NormalizeConfig = NormalizeConfig()) -> str:
    """Apply the cleanup rules; idempotent on its own output."""
    text = unicodedata.normalize("NFC", description)
    if cfg.url_to_host:
        text = URL_RE.sub(lambda m: m.group(1), text)
    out: list[str] = []
    for chunk in text.split():
        if chunk == VERSION_TOKEN:
            out.append(chunk)
            continue
        pieces = _split_chunk(chunk) if cfg.split_punctuation else [chunk]
        for piece in pieces:
            if cfg.keep_cve_ids and CVE_TOKEN_RE.fullmatch(piece):
                out.append(piece.upper())
            elif cfg.version_token and VERSION_RE.fullmatch(piece):
                out.append(VERSION_TOKEN)
            else:
                out.append(piece.lower() if cfg.lowercase else piece)
    return " ".join(out)


def tokenize(text: str) -> TokenSequence:
    """Whitespace split; drop pure-punctuation tokens and stopwords, counting drops."""
    tokens: list[str] = []
    dropped = 0
    for token in text.split():
        if not any(ch.isalnum() for ch in token):
            dropped += 1
        elif token.lower() in STOPWORDS:
            dropped += 1
        else:
            tokens.append(token)
    return TokenSequence(tuple(tokens), dropped)


def merge_phrases(seq: TokenSequence, lex: PhraseLexicon) -> TokenSequence:
    """Greedy longest-match left-to-right composite-term replacement."""
    tokens = seq.tokens
    out: list[str] = []
    i = 0
    while i < len(tokens):
        length = lex.match_at(tokens, i)
        if length:
            out.append("_".join(t.lower() for t in tokens[i:i + length]))
            i += length
        else:
            out.append(tokens[i])
            i += 1
    return TokenSequence(tuple(out), seq.dropped_count)


def prepare(description: str,
            lex: PhraseLexicon | None = None,
            cfg: NormalizeConfig = NormalizeConfig()) -> TokenSequence:
    """normalize -> tokenize -> merge_phrases convenience pipeline."""
    seq = tokenize(normalize(description, cfg))
    if lex is not None and len(lex):
        seq = merge_phrases(seq, lex)
    return seq
