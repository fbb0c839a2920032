"""Model stages: LSTM classifier, transformer encoder, MLM and classification heads."""

from .checkpoint import (
    ModelCheckpoint,
    build_model,
    checkpoint_from_model,
    load_checkpoint,
    load_encoder_weights,
    save_checkpoint,
    write_checkpoint,
)
from .configs import AVG_POOL_LAYERS, POOLING_STRATEGIES, EncoderConfig, HeadConfig, LstmConfig
from .embeddings import load_external_embeddings
from .encoder import EncoderLayer, TransformerEncoder, attention, encode
from .heads import (
    ClassifyHead,
    EncoderClassifier,
    MaskedLanguageModel,
    MlmHead,
    classify_head,
    mlm_loss,
    mlm_mask,
)
from .lstm import LstmCell, LstmClassifier, lstm_classify, pad_mask
from .params import Embedding, LayerNorm, Linear, Module

__all__ = [
    "AVG_POOL_LAYERS",
    "POOLING_STRATEGIES",
    "ClassifyHead",
    "Embedding",
    "EncoderClassifier",
    "EncoderConfig",
    "EncoderLayer",
    "HeadConfig",
    "LayerNorm",
    "Linear",
    "LstmCell",
    "LstmClassifier",
    "LstmConfig",
    "MaskedLanguageModel",
    "MlmHead",
    "ModelCheckpoint",
    "Module",
    "TransformerEncoder",
    "attention",
    "build_model",
    "checkpoint_from_model",
    "classify_head",
    "encode",
    "load_checkpoint",
    "load_encoder_weights",
    "load_external_embeddings",
    "lstm_classify",
    "mlm_loss",
    "mlm_mask",
    "pad_mask",
    "save_checkpoint",
    "write_checkpoint",
]
