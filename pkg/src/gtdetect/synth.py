"""Deterministic synthetic corpus for smoke tests and demos.

"human" documents are templated multi-sentence prose with Zipfian word
draws and occasional idioms; "machine" documents are the same kind of text
with all whitespace tokens shuffled, which wrecks sentence structure while
keeping the bag of words intact.
"""

from __future__ import annotations

from .corpus import Document
from .rng import Xorshift64Star

_ADJECTIVES = [
    "old", "small", "quiet", "bright", "young", "narrow", "ancient", "gentle",
    "modern", "famous", "local", "heavy", "warm", "dark", "simple",
]
_NOUNS = [
    "river", "village", "teacher", "garden", "mountain", "letter", "market",
    "road", "farmer", "station", "forest", "storm", "bridge", "harbor",
    "library", "valley", "mill", "orchard", "lantern", "meadow",
]
_VERBS = [
    "crossed", "watched", "followed", "reached", "opened", "covered",
    "climbed", "passed", "visited", "painted", "measured", "repaired",
    "planted", "carried", "guarded",
]
_ADVERBS = [
    "slowly", "quietly", "carefully", "often", "finally",
    "gently", "suddenly", "rarely", "eventually", "daily",
]
_PLACES = ["north", "south", "east", "west", "coast", "border", "square", "valley"]
_IDIOM_SENTENCES = [
    "At long last the plan worked.",
    "The decision came out of the blue.",
    "They agreed to call it a day.",
    "Fixing the roof was a piece of cake.",
    "A short welcome helped break the ice.",
]


def _zipf_pick(rng: Xorshift64Star, pool: list[str]) -> str:
    """Weight item i by 1/(i+1), approximating natural word frequencies."""
    weights = [1.0 / (i + 1) for i in range(len(pool))]
    total = sum(weights)
    u = rng.random() * total
    acc = 0.0
    for item, w in zip(pool, weights):
        acc += w
        if u < acc:
            return item
    return pool[-1]


def _sentence(rng: Xorshift64Star) -> str:
    adj = _zipf_pick(rng, _ADJECTIVES)
    noun = _zipf_pick(rng, _NOUNS)
    verb = _zipf_pick(rng, _VERBS)
    noun2 = _zipf_pick(rng, _NOUNS)
    adv = _zipf_pick(rng, _ADVERBS)
    place = _zipf_pick(rng, _PLACES)
    forms = [
        f"The {adj} {noun} {verb} the {noun2} {adv}.",
        f"A {noun} near the {place} {verb} the {adj} {noun2}.",
        f"The {noun} {adv} {verb} a {adj} {noun2} by the {place}.",
        f"People in the {noun} {verb} the {noun2} before the {adj} {noun}.",
    ]
    return forms[rng.randrange(len(forms))]


def _human_text(rng: Xorshift64Star) -> str:
    n_sent = 4 + rng.randrange(4)
    sentences = [_sentence(rng) for _ in range(n_sent)]
    if rng.randrange(3) == 0:
        sentences[rng.randrange(len(sentences))] = _IDIOM_SENTENCES[
            rng.randrange(len(_IDIOM_SENTENCES))
        ]
    if n_sent >= 6:
        cut = n_sent // 2
        return " ".join(sentences[:cut]) + "\n\n" + " ".join(sentences[cut:])
    return " ".join(sentences)


def _shuffled_text(rng: Xorshift64Star) -> str:
    tokens = _human_text(rng).split()
    rng.shuffle(tokens)
    return " ".join(tokens)


def generate_corpus(n_per_class: int = 200, seed: int = 0) -> tuple[list[Document], list[Document]]:
    """(human_docs, machine_docs), each of size n_per_class; fully seeded."""
    rng = Xorshift64Star(seed)
    human = [
        Document(id=f"synth-h-{i:04d}", text=_human_text(rng), label="human", source="synth")
        for i in range(n_per_class)
    ]
    machine = [
        Document(id=f"synth-m-{i:04d}", text=_shuffled_text(rng), label="machine", source="synth")
        for i in range(n_per_class)
    ]
    return human, machine
