"""Arabic-aware text normalization.

The cleanup pipeline applied by normalize(), in order:

1. drop URLs, @-mentions, and HTML entities
2. replace symbol/punctuation characters with spaces (letters, digits,
   combining marks, and optionally emoji survive)
3. lowercase Latin letters
4. drop standalone digit tokens, collapse whitespace
5. strip Arabic diacritics and the tatweel
6. fold hamza carriers (alef forms to bare alef, waw/yeh carriers)
7. split on whitespace; in topic mode, drop stopwords

Phrase mode runs the same pipeline but keeps stopwords in the stream, so a
downstream keyword-phrase pass can split candidates at them.
"""

from __future__ import annotations

import re
import sys
import unicodedata
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources

_URL = re.compile(r"(?:https?://|www\.)\S+", re.IGNORECASE)
_MENTION = re.compile(r"@\w+")
_ENTITY = re.compile(r"&#?\w+;")

# Arabic diacritics (harakat, Quranic annotation signs, dagger alef) plus the
# tatweel filler. Removing them never changes word identity.
_DIACRITIC_CODEPOINTS = (
    list(range(0x0610, 0x061B)) + list(range(0x064B, 0x0660)) + [0x0670, 0x0640]
)
_DIACRITIC_TABLE = {cp: None for cp in _DIACRITIC_CODEPOINTS}

# Hamza-carrier folding: alef variants collapse to bare alef, waw/yeh carriers
# to plain waw/yeh. Idempotent because no target appears as a source.
_HAMZA_TABLE = str.maketrans(
    {
        "أ": "ا",  # alef with hamza above
        "إ": "ا",  # alef with hamza below
        "آ": "ا",  # alef with madda
        "ٱ": "ا",  # alef wasla
        "ؤ": "و",  # waw with hamza
        "ئ": "ي",  # yeh with hamza
    }
)

# Pictographic blocks kept when keep_emoji is set.
_EMOJI_RANGES = (
    (0x1F1E6, 0x1F1FF),  # regional indicators
    (0x1F300, 0x1F5FF),
    (0x1F600, 0x1F64F),
    (0x1F680, 0x1F6FF),
    (0x1F900, 0x1F9FF),
    (0x1FA00, 0x1FAFF),
    (0x2600, 0x26FF),
    (0x2700, 0x27BF),
)


@dataclass
class TokenSequence:
    """Normalized tokens for one source document."""

    tokens: list[str]
    source_id: str = ""

    def __post_init__(self) -> None:
        for token in self.tokens:
            if not token or token.split() != [token]:
                raise ValueError(f"token {token!r} is empty or contains whitespace")

    def __len__(self) -> int:
        return len(self.tokens)

    def __iter__(self):
        return iter(self.tokens)

    @property
    def text(self) -> str:
        return " ".join(self.tokens)


@dataclass
class NormalizationConfig:
    """Normalization settings.

    mode is "topic" (stopwords removed) or "phrase" (stopwords kept so a
    phrase extractor can split on them). The stopword set is canonicalized
    through the same character pipeline on construction, so matching works
    on normalized forms. When stopwords is None the bundled Arabic+English
    defaults are used.
    """

    mode: str = "topic"
    stopwords: set[str] | None = None
    lowercase: bool = True
    keep_emoji: bool = True

    def __post_init__(self) -> None:
        if self.mode not in ("topic", "phrase"):
            raise ValueError(f"unknown normalization mode {self.mode!r}")
        if self.stopwords is None:
            self.stopwords = set(default_stopwords())
        self.stopwords = {_canonical_stopword(word) for word in self.stopwords}
        self.stopwords.discard("")
        if self.mode == "topic" and not self.stopwords:
            raise ValueError("topic mode requires a non-empty stopword set")


def _canonical_stopword(word: str) -> str:
    return normalize_hamza(remove_diacritics(word.strip().lower()))


def _is_emoji(ch: str) -> bool:
    code = ord(ch)
    return any(lo <= code <= hi for lo, hi in _EMOJI_RANGES)


def strip_noise(text: str, lowercase: bool = True, keep_emoji: bool = True) -> str:
    """Remove URLs, mentions, entities, and symbol characters.

    Letters, combining marks, and digits survive; every other character
    becomes a space. Standalone digit runs are then dropped and whitespace
    collapsed to single spaces.
    """
    text = _ENTITY.sub(" ", text)
    text = _URL.sub(" ", text)
    text = _MENTION.sub(" ", text)
    kept: list[str] = []
    for ch in text:
        if ch.isspace():
            kept.append(" ")
            continue
        category = unicodedata.category(ch)
        if category[0] in ("L", "M", "N"):
            kept.append(ch)
        elif keep_emoji and _is_emoji(ch):
            kept.append(ch)
        else:
            kept.append(" ")
    cleaned = "".join(kept)
    if lowercase:
        cleaned = cleaned.lower()
    tokens = [token for token in cleaned.split() if not token.isdigit()]
    return " ".join(tokens)


def remove_diacritics(text: str) -> str:
    """Strip Arabic diacritical marks and the tatweel filler."""
    return text.translate(_DIACRITIC_TABLE)


def normalize_hamza(text: str) -> str:
    """Fold hamza carrier variants onto their base letters."""
    return text.translate(_HAMZA_TABLE)


def normalize(text: str, config: NormalizationConfig, source_id: str = "") -> TokenSequence:
    """Run the full pipeline and tokenize on whitespace."""
    cleaned = strip_noise(text, lowercase=config.lowercase, keep_emoji=config.keep_emoji)
    cleaned = normalize_hamza(remove_diacritics(cleaned))
    # diacritic removal can strand a bare digit run, so filter once more
    tokens = [token for token in cleaned.split() if not token.isdigit()]
    if config.mode == "topic":
        tokens = [token for token in tokens if token not in config.stopwords]
    return TokenSequence(tokens, source_id)


def normalize_corpus(docs, config: NormalizationConfig) -> list[TokenSequence]:
    """Normalize every document of a corpus, preserving order."""
    return [normalize(doc.text, config, source_id=doc.id) for doc in docs]


def load_stopwords(path: str) -> set[str]:
    """Read a stopword file: one token per line, '#' starts a comment."""
    words: set[str] = set()
    with open(path, "r", encoding="utf-8") as handle:
        for line in handle:
            entry = line.split("#", 1)[0].strip()
            if entry:
                words.add(entry)
    if not words:
        raise ValueError(f"stopword file {path} holds no entries")
    return words


@lru_cache(maxsize=None)
def default_stopwords() -> frozenset[str]:
    """Bundled Arabic + English stopword lists, in canonical form."""
    words: set[str] = set()
    for name in ("stopwords_ar.txt", "stopwords_en.txt"):
        data = resources.files("dialect_insights").joinpath("data", name).read_text("utf-8")
        for line in data.splitlines():
            entry = line.split("#", 1)[0].strip()
            if entry:
                words.add(_canonical_stopword(entry))
    words.discard("")
    return frozenset(words)


if sys.maxunicode < 0x10FFFF:  # pragma: no cover
    raise RuntimeError("narrow Python builds are not supported")
