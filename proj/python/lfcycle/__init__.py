"""Self-supervised light field view synthesis."""

from ._lfcycle import (
    LightField,
    Model,
    dense_angular_size,
    evaluate,
    extract_epi,
    finetune,
    gen_planar,
    gen_two_layer,
    load_lf,
    load_model,
    oracle_reconstruct,
    pretrain,
    psnr,
    run_cli,
    save_lf,
    save_model,
    ssim,
    subsample,
    synthesize,
)

__all__ = [
    "LightField",
    "Model",
    "dense_angular_size",
    "evaluate",
    "extract_epi",
    "finetune",
    "gen_planar",
    "gen_two_layer",
    "load_lf",
    "load_model",
    "oracle_reconstruct",
    "pretrain",
    "psnr",
    "run_cli",
    "save_lf",
    "save_model",
    "ssim",
    "subsample",
    "synthesize",
]
