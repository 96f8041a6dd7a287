from .experiment import (
    BASELINE,
    DEFAULT_STRATEGIES,
    ExperimentGrid,
    LayoutContext,
    cell_seed,
    read_results,
    render_heatmap,
    run_cell,
    run_experiment,
    summarize,
    write_results,
)
from .metrics import RelevanceSetting, binarize, bpref, evaluate, load_qrels, write_qrels
from .synth import Benchmark, SynthConfig, generate_synthetic_benchmark, write_benchmark

__all__ = [
    "BASELINE",
    "Benchmark",
    "DEFAULT_STRATEGIES",
    "ExperimentGrid",
    "LayoutContext",
    "RelevanceSetting",
    "SynthConfig",
    "binarize",
    "bpref",
    "cell_seed",
    "evaluate",
    "generate_synthetic_benchmark",
    "load_qrels",
    "read_results",
    "render_heatmap",
    "run_cell",
    "run_experiment",
    "summarize",
    "write_benchmark",
    "write_qrels",
    "write_results",
]
