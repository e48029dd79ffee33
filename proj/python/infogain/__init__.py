"""Decision forests with bias-corrected information gain estimates."""

from ._core import (
    ConfigError,
    DataError,
    DomainError,
    Forest,
    FormatError,
    InfogainError,
    InsufficientSamplesError,
    all_1nn_distances,
    brute_force_1nn,
    digamma,
    grassberger_entropy,
    grassberger_g,
    ln_gamma,
    miller_entropy,
    multinomial_info_gain_exact,
    mvn_diag_entropy,
    mvn_plugin_entropy,
    mvn_umvue_entropy,
    naive_entropy,
    one_nn_entropy,
    simulate_bias,
    split_score,
    unit_ball_volume,
)

__all__ = [name for name in dir() if not name.startswith("_")]
