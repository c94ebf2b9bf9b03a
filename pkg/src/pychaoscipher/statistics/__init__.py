from .bits import BitSequence
from .ent import (
    EntReport,
    autocorrelation,
    basic_chi_square,
    ent_chi_square,
    ent_entropy,
    ent_mean,
    ent_monte_carlo_pi,
    ent_optimum_compression,
    ent_report,
    ent_serial_correlation,
)
from .nist import (
    approximate_entropy,
    block_frequency,
    cumulative_sums,
    dft,
    linear_complexity,
    longest_run,
    monobit,
    non_overlapping_template,
    overlapping_template,
    random_excursions,
    random_excursions_variant,
    rank,
    run_battery,
    runs,
    serial,
    universal,
)
from .report import TestResult, figure_data, load_report, results_to_json, write_report_csv
