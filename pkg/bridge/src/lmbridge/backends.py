"""Model backends: anything that maps a context to next-token log-probabilities.

A backend exposes vocabulary metadata, encode/decode, and next_logprobs.
Log-probability vectors are float64, full length, and exactly normalized
(log-softmax may run in 32-bit inside the model; a float64 normalization
pass guarantees the wire invariant that exp-sums stay within 1e-6 of 1).
"""

from __future__ import annotations

import numpy as np


def _normalize_float64(logprobs: np.ndarray) -> np.ndarray:
    lp = np.asarray(logprobs, dtype=np.float64)
    m = lp.max()
    lp = lp - (m + np.log(np.exp(lp - m).sum()))
    return lp


class ToyBackend:
    """Deterministic byte-level causal model; no weights to download.

    Ids 0..3 are pad/unk/bos/eos; byte b maps to id 4+b (vocab 260).
    Next-token scores come from a fixed random embedding table combined
    with an exponentially decayed context sum, so identical contexts give
    bit-identical vectors.
    """

    def __init__(self, vocab_size: int = 260, seed: int = 7, dim: int = 48):
        if vocab_size < 8:
            raise ValueError("toy backend needs vocab_size >= 8")
        rng = np.random.default_rng(seed)
        self.vocab_size = vocab_size
        self.pad_id, self.unk_id, self.bos_id, self.eos_id = 0, 1, 2, 3
        self._table = rng.standard_normal((vocab_size, dim)).astype(np.float32)
        self._base = rng.standard_normal(dim).astype(np.float32)
        self._decay = np.float32(0.7)

    def encode(self, text: str) -> list[int]:
        data = text.encode("utf-8")
        return [self.bos_id] + [4 + (b % (self.vocab_size - 4)) for b in data]

    def decode(self, ids) -> str:
        data = bytes(i - 4 for i in ids if 4 <= i < self.vocab_size)
        return data.decode("utf-8", errors="replace")

    def next_logprobs(self, context) -> np.ndarray:
        state = self._base.copy()
        for tok in context:
            if not 0 <= int(tok) < self.vocab_size:
                raise ValueError(f"token id {tok} out of range")
            state = self._decay * state + self._table[int(tok)]
        logits = (self._table @ state).astype(np.float32)
        logits -= logits.max()
        log_z = np.float32(np.log(np.exp(logits, dtype=np.float32).sum(dtype=np.float32)))
        return _normalize_float64(logits - log_z)


class HFBackend:
    """A pretrained causal language model behind the backend contract.

    The model and tokenizer are injectable so tests can supply tiny local
    instances; from_pretrained loads by hub id or local path. Inference is
    greedy-free and stateless: the full context is re-scored per request,
    and only the last position's distribution is returned.
    """

    def __init__(self, model, tokenizer, vocab_size: int | None = None):
        import torch

        self._torch = torch
        self.model = model.eval()
        self.tokenizer = tokenizer
        self.vocab_size = int(vocab_size or model.config.vocab_size)
        self.bos_id = self._special("bos_token_id")
        self.eos_id = self._special("eos_token_id")
        self.unk_id = self._special("unk_token_id")

    def _special(self, name: str) -> int:
        for source in (self.tokenizer, self.model.config):
            value = getattr(source, name, None)
            if value is not None:
                return int(value)
        return 0

    @classmethod
    def from_pretrained(cls, model_id: str) -> "HFBackend":
        from transformers import AutoModelForCausalLM, AutoTokenizer

        tokenizer = AutoTokenizer.from_pretrained(model_id)
        model = AutoModelForCausalLM.from_pretrained(model_id)
        return cls(model, tokenizer)

    def encode(self, text: str) -> list[int]:
        return [int(i) for i in self.tokenizer.encode(text)]

    def decode(self, ids) -> str:
        return self.tokenizer.decode(list(ids))

    def next_logprobs(self, context) -> np.ndarray:
        torch = self._torch
        ids = [int(i) for i in context] or [self.bos_id]
        for tok in ids:
            if not 0 <= tok < self.vocab_size:
                raise ValueError(f"token id {tok} out of range")
        with torch.no_grad():
            out = self.model(input_ids=torch.tensor([ids], dtype=torch.long))
            logits = out.logits[0, -1, : self.vocab_size].to(torch.float32)
            logprobs = torch.log_softmax(logits, dim=-1)
        return _normalize_float64(logprobs.numpy())


def load_backend(spec: str):
    """Backend factory: "toy[:vocab_size]" or "hf:<model id or path>"."""
    if spec.startswith("toy"):
        _, _, arg = spec.partition(":")
        return ToyBackend(vocab_size=int(arg) if arg else 260)
    if spec.startswith("hf:"):
        return HFBackend.from_pretrained(spec[len("hf:") :])
    raise ValueError(f"unknown backend spec {spec!r} (use toy[:V] or hf:<id>)")
