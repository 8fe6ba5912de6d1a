"""Tokenization and hand-designed post features (HAND)."""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources
from pathlib import Path

_TOKEN_RE = re.compile(r"\w+(?:'\w+)*", re.UNICODE)
_SENTENCE_RE = re.compile(r"[^.!?]*[.!?]+|[^.!?]+$")
_URL_RE = re.compile(r"(?:https?://|www\.)[^\s)\]>]+", re.IGNORECASE)
_BOLD_RE = re.compile(r"(\*\*|__)(?=\S)(.+?)(?<=\S)\1", re.DOTALL)
_ITALIC_RE = re.compile(r"(?<![*_\w])([*_])(?=[^\s*_])(.+?)(?<=[^\s*_])\1(?![*_\w])", re.DOTALL)
_LIST_RE = re.compile(r"^\s*(?:[-*+]|\d+[.)])\s+\S", re.MULTILINE)
_VOWEL_GROUP_RE = re.compile(r"[aeiouy]+")

FIRST_PERSON = frozenset({"i", "me", "my", "mine", "we", "us", "our", "ours"})
SECOND_PERSON = frozenset({"you", "your", "yours"})


def tokenize(text: str) -> list[str]:
    """Lowercased word tokens; whitespace and punctuation both split."""
    return [t.lower() for t in _TOKEN_RE.findall(text)]


def count_sentences(text: str) -> int:
    return sum(1 for s in _SENTENCE_RE.findall(text) if _TOKEN_RE.search(s))


def count_syllables(word: str) -> int:
    """Contiguous vowel groups, at least one per word."""
    return max(1, len(_VOWEL_GROUP_RE.findall(word.lower())))


def flesch_kincaid_grade(text: str) -> float:
    words = tokenize(text)
    if not words:
        return 0.0
    sentences = max(1, count_sentences(text))
    syllables = sum(count_syllables(w) for w in words)
    return 0.39 * (len(words) / sentences) + 11.8 * (syllables / len(words)) - 15.59


def _span_rate(pattern: re.Pattern, text: str) -> float:
    if not text:
        return 0.0
    covered = sum(m.end() - m.start() for m in pattern.finditer(text))
    return covered / len(text)


@lru_cache(maxsize=None)
def _default_data_dir() -> Path:
    return Path(str(resources.files("controversy") / "data"))


def load_lexicon(path=None) -> dict[str, float]:
    """Signed word weights; one ``word<TAB>weight`` pair per line."""
    path = Path(path) if path is not None else _default_data_dir() / "sentiment.tsv"
    lexicon = {}
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            word, weight = line.split("\t")
            lexicon[word.lower()] = float(weight)
    return lexicon


def load_wordlists(directory=None) -> dict[str, frozenset[str]]:
    """Category wordlists: one ``<category>.txt`` per category, one token per line."""
    directory = Path(directory) if directory is not None else _default_data_dir() / "wordlists"
    lists = {}
    for path in sorted(directory.glob("*.txt")):
        with open(path, encoding="utf-8") as fh:
            lists[path.stem] = frozenset(w.strip().lower() for w in fh if w.strip())
    return lists


@dataclass(frozen=True)
class FieldFeatures:
    length: int
    type_token_ratio: float
    rate_first_person: float
    rate_second_person: float
    rate_question_marks: float
    rate_capitalized_chars: float
    sentiment: float


@dataclass(frozen=True)
class HandFeatures:
    title: FieldFeatures
    body: FieldFeatures
    n_links: int
    n_reddit_links: int
    n_imgur_links: int
    n_sentences: int
    readability: float
    rate_italics: float
    rate_bold: float
    has_list: bool
    wordlist_rates: dict[str, float] = field(default_factory=dict)

    def to_row(self) -> dict[str, float]:
        row = {}
        for prefix, ff in (("title", self.title), ("body", self.body)):
            for name, value in vars(ff).items():
                row[f"{prefix}_{name}"] = float(value)
        for name in ("n_links", "n_reddit_links", "n_imgur_links", "n_sentences",
                     "readability", "rate_italics", "rate_bold", "has_list"):
            row[name] = float(getattr(self, name))
        for cat, rate in sorted(self.wordlist_rates.items()):
            row[f"wordlist_{cat}"] = rate
        return row


def field_features(text: str, lexicon: dict[str, float]) -> FieldFeatures:
    tokens = tokenize(text)
    n = len(tokens)
    letters = [ch for ch in text if ch.isalpha()]
    polarities = [lexicon[t] for t in tokens if t in lexicon]
    return FieldFeatures(
        length=n,
        type_token_ratio=len(set(tokens)) / n if n else 0.0,
        rate_first_person=sum(t in FIRST_PERSON for t in tokens) / n if n else 0.0,
        rate_second_person=sum(t in SECOND_PERSON for t in tokens) / n if n else 0.0,
        rate_question_marks=text.count("?") / len(text) if text else 0.0,
        rate_capitalized_chars=sum(ch.isupper() for ch in letters) / len(letters) if letters else 0.0,
        sentiment=sum(polarities) / len(polarities) if polarities else 0.0,
    )


def hand_features(title: str, body: str, lexicon=None, wordlists=None) -> HandFeatures:
    lexicon = load_lexicon() if lexicon is None else lexicon
    wordlists = load_wordlists() if wordlists is None else wordlists
    combined = f"{title}\n\n{body}" if body else title
    urls = _URL_RE.findall(combined)
    tokens = tokenize(combined)
    n = len(tokens)
    without_bold = _BOLD_RE.sub(lambda m: " " * len(m.group(0)), combined)
    return HandFeatures(
        title=field_features(title, lexicon),
        body=field_features(body, lexicon),
        n_links=len(urls),
        n_reddit_links=sum(1 for u in urls if "reddit.com" in u.lower() or "redd.it" in u.lower()),
        n_imgur_links=sum(1 for u in urls if "imgur.com" in u.lower()),
        n_sentences=count_sentences(combined),
        readability=flesch_kincaid_grade(combined),
        rate_italics=_span_rate(_ITALIC_RE, without_bold),
        rate_bold=_span_rate(_BOLD_RE, combined),
        has_list=bool(_LIST_RE.search(combined)),
        wordlist_rates={cat: (sum(t in words for t in tokens) / n if n else 0.0)
                        for cat, words in wordlists.items()},
    )
