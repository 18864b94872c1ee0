"""JSON and CSV encodings shared by the CLI and report writers.

Complex matrices travel as row-major arrays of [re, im] pairs with an explicit
shape, which is lossless and language-neutral.  Reports are serialized with
sorted keys so identical inputs produce byte-identical files.
"""

from __future__ import annotations

import csv
import io
import json

import numpy as np

from .errors import ConfigError
from .freeprod import FreeElement, Letter


def matrix_to_json(mat: np.ndarray) -> dict:
    arr = np.asarray(mat, dtype=complex)
    data = [[float(z.real), float(z.imag)] for z in arr.reshape(-1)]
    return {"shape": list(arr.shape), "data": data}


def matrix_from_json(obj, pointer: str = "") -> np.ndarray:
    if not isinstance(obj, dict) or "shape" not in obj or "data" not in obj:
        raise ConfigError(
            "matrix objects need 'shape' and 'data'",
            [(pointer, "expected {shape, data}")],
        )
    shape = tuple(int(s) for s in obj["shape"])
    expected = 1
    for s in shape:
        expected *= s
    data = obj["data"]
    if len(data) != expected:
        raise ConfigError(
            "matrix data length does not match shape",
            [(pointer + "/data", f"expected {expected} entries, got {len(data)}")],
        )
    values = [complex(re, im) for re, im in data]
    return np.array(values, dtype=complex).reshape(shape)


def free_element_to_json(x: FreeElement) -> dict:
    return {
        "terms": [
            {
                "coeff": [float(c.real), float(c.imag)],
                "word": [
                    {"side": letter.side, "value": matrix_to_json(letter.value)}
                    for letter in word
                ],
            }
            for c, word in x.terms
        ]
    }


def free_element_from_json(obj, pointer: str = "") -> FreeElement:
    terms = []
    for i, term in enumerate(obj.get("terms", [])):
        coeff = term.get("coeff", [1.0, 0.0])
        word = [
            Letter(
                int(letter["side"]),
                matrix_from_json(letter["value"], f"{pointer}/terms/{i}/word/{j}/value"),
            )
            for j, letter in enumerate(term.get("word", []))
        ]
        terms.append((complex(coeff[0], coeff[1]), tuple(word)))
    return FreeElement(tuple(terms))


def load_probe_file(path: str) -> list[FreeElement]:
    with open(path) as fh:
        obj = json.load(fh)
    elements = obj["elements"] if isinstance(obj, dict) else obj
    return [
        free_element_from_json(el, f"/elements/{i}") for i, el in enumerate(elements)
    ]


def canonical_json(obj) -> str:
    """Deterministic JSON text: sorted keys, fixed separators, trailing newline."""
    return json.dumps(obj, sort_keys=True, indent=2, separators=(",", ": ")) + "\n"


def stats_csv(rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["sample", "intersection_dim"])
    for index, dim in rows:
        writer.writerow([index, dim])
    return buf.getvalue()
