"""Tokenization, lemmatization and lightweight text vectors.

Everything here is deterministic: no global RNG, no process-dependent
hashing. The corpus generator, the runtime pipeline and the tests all
share these primitives, so NL text compares equal across the whole
system iff it normalizes equal here.
"""

from __future__ import annotations

import hashlib
import re

PLACEHOLDER_RE = re.compile(r"^@[A-Z_][A-Z_0-9]*\.[A-Z_][A-Z_0-9]*$")
JOIN_TOKEN = "@JOIN"

_NL_SPLIT_RE = re.compile(
    r"@[A-Za-z_][A-Za-z_0-9]*\.[A-Za-z_][A-Za-z_0-9]*"  # placeholder
    r"|'[^']*'"                                          # single-quoted span
    r"|\"[^\"]*\""                                       # double-quoted span
    r"|[A-Za-z_][A-Za-z_0-9]*"                           # word / identifier
    r"|\d+\.\d+|\d+"                                     # number
    r"|,"                                                # kept punctuation
)


def is_placeholder(token: str) -> bool:
    return bool(PLACEHOLDER_RE.match(token))


def is_number(token: str) -> bool:
    try:
        float(token)
    except ValueError:
        return False
    return True


def scan_nl(text: str) -> list[tuple[str, int, int]]:
    """Like tokenize_nl but keeps raw surface and character offsets.

    The runtime preprocessor needs original casing to spot capitalized
    constant spans before everything is lowercased.
    """
    return [(m.group(0), m.start(), m.end()) for m in _NL_SPLIT_RE.finditer(text)]


def tokenize_nl(text: str) -> list[str]:
    """Split natural-language text into tokens.

    Placeholders (@TABLE.COLUMN) are uppercased and kept whole, quoted
    spans stay single tokens (quotes retained so the preprocessor can
    spot explicit constants), words are lowercased, commas survive as
    their own token, and sentence punctuation (. ? !) is dropped.
    """
    tokens = []
    for m in _NL_SPLIT_RE.finditer(text):
        tok = m.group(0)
        if tok.startswith("@"):
            tokens.append(tok.upper())
        elif tok[0] in "'\"":
            tokens.append(tok)
        elif tok == ",":
            tokens.append(tok)
        else:
            tokens.append(tok.lower())
    return tokens


# Irregular forms the suffix rules get wrong. Mostly verbs (be/have and
# strong pasts), irregular plurals, and -ing/-ed lookalikes that are not
# inflections at all.
IRREGULAR_LEMMAS = {
    # be / have / do / modal-ish
    "am": "be", "is": "be", "are": "be", "was": "be", "were": "be",
    "been": "be", "being": "be", "has": "have", "had": "have",
    "having": "have", "does": "do", "did": "do", "done": "do",
    "doing": "do", "goes": "go", "went": "go", "gone": "go",
    "going": "go", "can": "can", "could": "can", "will": "will",
    "would": "will", "shall": "shall", "should": "shall",
    "may": "may", "might": "may", "must": "must",
    # strong / irregular verbs
    "gave": "give", "given": "give", "giving": "give",
    "got": "get", "gotten": "get", "getting": "get",
    "took": "take", "taken": "take", "taking": "take",
    "made": "make", "making": "make",
    "said": "say", "saying": "say",
    "saw": "see", "seen": "see", "seeing": "see",
    "found": "find", "finding": "find",
    "told": "tell", "came": "come", "coming": "come",
    "knew": "know", "known": "know",
    "showed": "show", "shown": "show",
    "held": "hold", "kept": "keep", "left": "leave",
    "met": "meet", "paid": "pay", "ran": "run", "running": "run",
    "sat": "sit", "sitting": "sit", "spent": "spend",
    "stood": "stand", "thought": "think", "understood": "understand",
    "wrote": "write", "written": "write", "writing": "write",
    "chose": "choose", "chosen": "choose", "choosing": "choose",
    "drew": "draw", "drawn": "draw",
    "grew": "grow", "grown": "grow",
    "lay": "lie", "lain": "lie", "lied": "lie",
    "lost": "lose", "losing": "lose",
    "sold": "sell", "sent": "send", "built": "build",
    "bought": "buy", "brought": "bring", "caught": "catch",
    "felt": "feel", "fell": "fall", "fallen": "fall",
    "flew": "fly", "flown": "fly", "flies": "fly",
    "led": "lead", "lit": "light", "read": "read",
    "rose": "rise", "risen": "rise", "rising": "rise",
    "spoke": "speak", "spoken": "speak",
    "swam": "swim", "swum": "swim", "swimming": "swim",
    "wore": "wear", "worn": "wear", "won": "win", "winning": "win",
    "agreed": "agree", "freed": "free",
    "used": "use", "using": "use",
    "named": "name", "naming": "name",
    "gives": "give", "lives": "live", "living": "live", "lived": "live",
    "dying": "die", "died": "die", "dies": "die",
    "tying": "tie", "tied": "tie", "ties": "tie",
    "treated": "treat", "diagnosed": "diagnose", "diagnosing": "diagnose",
    "compared": "compare", "comparing": "compare",
    "included": "include", "including": "include",
    "located": "locate", "placed": "place", "ranked": "rank",
    "recorded": "record", "averaged": "average", "averaging": "average",
    "equaled": "equal", "equalled": "equal", "exceeded": "exceed",
    "exceeds": "exceed", "measured": "measure", "measuring": "measure",
    "received": "receive", "required": "require", "provided": "provide",
    "managed": "manage", "served": "serve", "serving": "serve",
    "stated": "state", "noted": "note", "related": "relate",
    "combined": "combine", "defined": "define", "described": "describe",
    "arranged": "arrange", "sorted": "sort", "grouped": "group",
    "summarized": "summarize", "computed": "compute", "computing": "compute",
    "calculated": "calculate", "calculating": "calculate",
    "determined": "determine", "retrieved": "retrieve",
    "returned": "return", "identified": "identify",
    "enumerated": "enumerate", "enumerating": "enumerate",
    "presented": "present", "displayed": "display", "displaying": "display",
    # irregular plurals and -s lookalikes
    "men": "man", "women": "woman", "children": "child",
    "people": "person", "feet": "foot", "teeth": "tooth",
    "mice": "mouse", "geese": "goose",
    "diagnoses": "diagnosis", "analyses": "analysis", "bases": "basis",
    "crises": "crisis", "theses": "thesis",
    "data": "datum", "criteria": "criterion", "phenomena": "phenomenon",
    "indices": "index", "matrices": "matrix", "vertices": "vertex",
    "statuses": "status", "viruses": "virus", "censuses": "census",
    "species": "species", "series": "series",
    "this": "this", "his": "his", "its": "its", "hers": "hers",
    "theirs": "theirs", "ours": "ours", "yours": "yours",
    "us": "us", "thus": "thus", "plus": "plus", "minus": "minus",
    "versus": "versus", "as": "as", "gas": "gas", "bus": "bus",
    "yes": "yes", "less": "less",
    "business": "business", "illness": "illness",
    "address": "address", "process": "process", "class": "class",
    "famous": "famous", "various": "various", "previous": "previous",
    "numerous": "numerous", "days": "day", "always": "always",
    "perhaps": "perhaps", "news": "news",
    # -ing / -ed lookalikes that are plain words
    "thing": "thing", "things": "thing", "nothing": "nothing",
    "something": "something", "anything": "anything",
    "everything": "everything", "during": "during", "king": "king",
    "ring": "ring", "sing": "sing", "bring": "bring", "spring": "spring",
    "string": "string", "morning": "morning", "evening": "evening",
    "wedding": "wedding", "building": "building", "ceiling": "ceiling",
    "sibling": "sibling", "feeling": "feeling",
    "need": "need", "needed": "need", "indeed": "indeed", "speed": "speed",
    "breed": "breed", "deed": "deed", "seed": "seed",
    "hundred": "hundred", "sacred": "sacred", "red": "red",
    "bed": "bed", "wicked": "wicked", "naked": "naked",
    "united": "united", "aged": "aged", "changed": "change",
    "visited": "visit", "belonged": "belong",
    # misc frequent words that must stay put
    "longest": "longest", "oldest": "oldest", "highest": "highest",
    "largest": "largest", "smallest": "smallest", "youngest": "youngest",
    "shortest": "shortest", "lowest": "lowest", "deepest": "deepest",
    "tallest": "tallest", "greatest": "greatest", "fewest": "fewest",
    "most": "most", "least": "least", "mean": "mean",
    "whose": "whose", "these": "these", "those": "those",
    "there": "there", "where": "where", "here": "here",
}

# Words ending in vowel+'s' or other shapes the -s rule must not touch.
_NO_STRIP_S_SUFFIXES = ("ss", "us", "is", "'s")

# After stripping -ed / -ing, restore a final 'e' when the stem ends in
# one of these (mov+ed -> move, compar+ing -> compare).
_E_RESTORE_ENDINGS = ("v", "c", "z", "u", "iz", "at", "ut")

_DOUBLES = ("bb", "dd", "gg", "ll", "mm", "nn", "pp", "rr", "tt")


def _strip_plural(word: str) -> str:
    if word.endswith("ies") and len(word) > 4:
        return word[:-3] + "y"
    if word.endswith("es") and len(word) > 4:
        stem = word[:-2]
        if stem.endswith(("s", "x", "z", "ch", "sh")):
            return stem
        # e.g. "tables" -> "table", "stores" -> "store"
        return word[:-1]
    if word.endswith("s") and not word.endswith(_NO_STRIP_S_SUFFIXES) and len(word) > 3:
        return word[:-1]
    return word


def _strip_ed_ing(word: str) -> str:
    if word.endswith("ied") and len(word) > 4:
        return word[:-3] + "y"
    for suffix in ("ing", "ed"):
        if not word.endswith(suffix):
            continue
        stem = word[: -len(suffix)]
        if len(stem) < 3:
            return word
        if suffix == "ed" and stem.endswith("e"):
            # "-eed" past forms are irregular; leave them alone
            return word
        if stem.endswith(_DOUBLES):
            return stem[:-1]
        for ending in _E_RESTORE_ENDINGS:
            if stem.endswith(ending):
                return stem + "e"
        if stem.endswith("g") and not stem.endswith("ng"):
            return stem + "e"
        return stem
    return word


def lemmatize_token(token: str) -> str:
    """Lemma of a single token; placeholders and numbers pass through."""
    if is_placeholder(token) or token == JOIN_TOKEN or is_number(token):
        return token
    if not token or not token[0].isalpha():
        return token
    word = token.lower()
    if word in IRREGULAR_LEMMAS:
        return IRREGULAR_LEMMAS[word]
    stripped = _strip_plural(word)
    if stripped != word:
        word = IRREGULAR_LEMMAS.get(stripped, stripped)
        # "stayed" already handled below; plurals never chain into -ed
        return word
    word = _strip_ed_ing(word)
    return IRREGULAR_LEMMAS.get(word, word)


def lemmatize(tokens: list[str]) -> list[str]:
    """Lemmatize a token sequence; idempotent by construction of the rules."""
    return [lemmatize_token(t) for t in tokens]


def normalize_constant(text: str) -> str:
    """Lowercase, trim and collapse internal whitespace."""
    return " ".join(text.strip().lower().split())


def stable_hash(*parts) -> int:
    """Order-sensitive 64-bit hash of the given parts, stable across runs."""
    h = hashlib.sha256()
    for part in parts:
        h.update(repr(part).encode("utf-8"))
        h.update(b"\x00")
    return int.from_bytes(h.digest()[:8], "big")


def char_trigrams(text: str) -> frozenset[str]:
    """Character trigram set of the normalized text, with boundary pads."""
    norm = normalize_constant(text)
    padded = f"##{norm}##"
    return frozenset(padded[i : i + 3] for i in range(len(padded) - 2))


def trigram_jaccard_distance(a: str, b: str) -> float:
    """1 - Jaccard similarity of the two strings' character trigram sets."""
    ta, tb = char_trigrams(a), char_trigrams(b)
    if not ta and not tb:
        return 0.0
    union = len(ta | tb)
    if union == 0:
        return 1.0
    return 1.0 - len(ta & tb) / union


def trigram_vector(text: str, dim: int = 64) -> list[float]:
    """Hashed character-trigram count vector; the embedding fallback."""
    norm = normalize_constant(text)
    padded = f"##{norm}##"
    vec = [0.0] * dim
    for i in range(len(padded) - 2):
        idx = stable_hash("trigram", padded[i : i + 3]) % dim
        vec[idx] += 1.0
    return vec
