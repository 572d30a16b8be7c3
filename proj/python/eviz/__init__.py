"""Energy time series to image encodings, dataset and metric utilities."""

from ._eviz import (
    EvizError,
    bleu,
    build_prompt,
    cross_entropy,
    cwt,
    default_scales,
    effective_batch,
    embed,
    encode_png,
    lr_at,
    mean_nll,
    morlet,
    parse_prompt,
    perplexity,
    recurrence_matrix,
    render_heatmap,
    render_surface,
    rouge_l,
    run_cli,
    scale_to_frequency,
    solve_epsilon,
    tokenize,
    training_constants_json,
)

__all__ = [
    "EvizError",
    "bleu",
    "build_prompt",
    "cross_entropy",
    "cwt",
    "default_scales",
    "effective_batch",
    "embed",
    "encode_png",
    "lr_at",
    "mean_nll",
    "morlet",
    "parse_prompt",
    "perplexity",
    "recurrence_matrix",
    "render_heatmap",
    "render_surface",
    "rouge_l",
    "run_cli",
    "scale_to_frequency",
    "solve_epsilon",
    "tokenize",
    "training_constants_json",
]
