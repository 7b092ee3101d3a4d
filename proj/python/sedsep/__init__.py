"""Sound separation front-end for sound event detection."""

from ._sedsep import (
    SedsepError,
    collar_f1,
    combine_sources,
    combine_with_mixture,
    decode_events,
    desed_classes,
    generate_clip,
    istft,
    late_integration,
    logmel,
    loss_active,
    loss_inactive,
    mixture_consistency,
    oracle_posteriors,
    oracle_separate,
    pit_assign,
    psds,
    read_wav,
    run_cli,
    scheme_names,
    si_snr,
    si_snr_improvement,
    stft,
    write_wav,
)

__version__ = "0.1.0"
