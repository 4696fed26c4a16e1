"""Exhaustive n-gram window enumeration over a token list.

Used to cross-check paraphrase and drop outputs: every emitted variant
must correspond to one window or one deletion this scan finds.
"""


def lexicon_windows(tokens, keys, max_n):
    """All (start, length, key) windows whose space-joined tokens are a key.

    Windows touching a placeholder token (@...) are excluded, mirroring
    the augmentation contract that placeholders are never rewritten.
    """
    out = []
    for i in range(len(tokens)):
        for n in range(1, max_n + 1):
            if i + n > len(tokens):
                break
            window = tokens[i : i + n]
            if any(t.startswith("@") for t in window):
                continue
            key = " ".join(window)
            if key in keys:
                out.append((i, n, key))
    return out


def single_deletions(tokens, banned):
    """Every token list reachable by deleting one non-banned token.

    `banned` is a callable deciding whether a token may not be dropped.
    Returns a set of space-joined variants.
    """
    out = set()
    for i, tok in enumerate(tokens):
        if banned(tok):
            continue
        out.add(" ".join(tokens[:i] + tokens[i + 1 :]))
    return out
