"""Dysfluent sequence alignment: simulation, classic and neural aligners."""

import json

from ._core import (  # noqa: F401
    CodecError,
    DataError,
    Error,
    InventoryError,
    Model,
    ModelError,
    __version__,
    align,
    category_of,
    ctc_greedy_decode,
    demo_sentences,
    focal_loss_value,
    inventory,
    similar,
)
from ._core import simulate_json as _simulate_json


def simulate(texts, n, seed=0, level="phoneme", proportions=(1.0, 1.0, 1.0, 1.0)):
    """Simulated records as dicts (same fields as the JSONL corpus)."""
    return [json.loads(line) for line in _simulate_json(list(texts), n, seed, level, list(proportions))]
