#!/usr/bin/env python3
"""Export a Hugging Face BERT-family encoder to the tunisent checkpoint
directory format (manifest.json + weights.bin + vocab.txt).

Typical use, once, on a machine with the model available:

    python tools/export_hf_checkpoint.py bert-base-multilingual-cased out/mbert

Afterwards point TUNISENT_MODEL_DIR (or the experiment config's model_dir)
at the output directory.
"""

import argparse
import json
import sys
from pathlib import Path

TENSOR_ORDER_EMBEDDINGS = [
    "embeddings.word_embeddings.weight",
    "embeddings.position_embeddings.weight",
    "embeddings.token_type_embeddings.weight",
    "embeddings.LayerNorm.weight",
    "embeddings.LayerNorm.bias",
]

LAYER_TENSORS = [
    "attention.self.query.weight",
    "attention.self.query.bias",
    "attention.self.key.weight",
    "attention.self.key.bias",
    "attention.self.value.weight",
    "attention.self.value.bias",
    "attention.output.dense.weight",
    "attention.output.dense.bias",
    "attention.output.LayerNorm.weight",
    "attention.output.LayerNorm.bias",
    "intermediate.dense.weight",
    "intermediate.dense.bias",
    "output.dense.weight",
    "output.dense.bias",
    "output.LayerNorm.weight",
    "output.LayerNorm.bias",
]


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("model", help="model name or local path")
    parser.add_argument("out_dir", help="checkpoint directory to create")
    args = parser.parse_args()

    try:
        import numpy as np
        from transformers import AutoModel, AutoTokenizer
    except ImportError as e:  # pragma: no cover
        print(f"error: {e}; install 'transformers' and 'numpy'",
              file=sys.stderr)
        return 1

    model = AutoModel.from_pretrained(args.model)
    tokenizer = AutoTokenizer.from_pretrained(args.model)
    config = model.config
    state = {k: v.detach().cpu().numpy().astype(np.float32)
             for k, v in model.state_dict().items()}

    names = list(TENSOR_ORDER_EMBEDDINGS)
    for layer in range(config.num_hidden_layers):
        names += [f"encoder.layer.{layer}.{t}" for t in LAYER_TENSORS]
    missing = [n for n in names if n not in state]
    if missing:
        print(f"error: model lacks expected tensors: {missing[:4]} ...",
              file=sys.stderr)
        return 1

    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)

    tensors = []
    offset = 0
    with open(out / "weights.bin", "wb") as blob:
        for name in names:
            arr = np.ascontiguousarray(state[name])
            tensors.append({
                "name": name,
                "shape": list(arr.shape),
                "offset": offset,
            })
            blob.write(arr.tobytes())
            offset += arr.size

    manifest = {
        "format": "tunisent-bert-v1",
        "hidden_size": config.hidden_size,
        "num_layers": config.num_hidden_layers,
        "num_heads": config.num_attention_heads,
        "intermediate_size": config.intermediate_size,
        "max_position": config.max_position_embeddings,
        "vocab_size": config.vocab_size,
        "layer_norm_eps": config.layer_norm_eps,
        "do_lower_case": bool(getattr(tokenizer, "do_lower_case", False)),
        "source_model": args.model,
        "tensors": tensors,
    }
    with open(out / "manifest.json", "w", encoding="utf-8") as f:
        json.dump(manifest, f, indent=2)

    vocab = tokenizer.get_vocab()
    by_id = sorted(vocab.items(), key=lambda kv: kv[1])
    if [i for _, i in by_id] != list(range(len(by_id))):
        print("error: tokenizer vocabulary ids are not dense",
              file=sys.stderr)
        return 1
    with open(out / "vocab.txt", "w", encoding="utf-8") as f:
        for piece, _ in by_id:
            f.write(piece + "\n")

    print(f"wrote {offset * 4} bytes of weights and {len(by_id)} pieces "
          f"to {out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
