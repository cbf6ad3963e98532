"""
Writing pruner inputs from NumPy arrays
=======================================

Converts ``.npy`` arrays into the FSRT files the ``fsrprune prune`` command
reads. This is a convenience script, not a supported interface.

    python export_tensors.py tokens.npy cls_attn.npy query.npy outdir/
"""

import sys
from pathlib import Path

import numpy as np

from fsrprune.tensor_io import KIND_CLS_ATTENTION, KIND_QUERY, KIND_TOKENS, write_tensor

if __name__ == "__main__":
    tokens, attn, query, out = sys.argv[1:5]
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    write_tensor(np.load(tokens), out / "tokens.fsrt", KIND_TOKENS)
    write_tensor(np.load(attn), out / "attn.fsrt", KIND_CLS_ATTENTION)
    write_tensor(np.load(query).reshape(-1), out / "query.fsrt", KIND_QUERY)
    print("wrote", *sorted(p.name for p in out.glob("*.fsrt")))
