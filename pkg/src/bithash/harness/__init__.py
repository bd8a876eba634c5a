from .dataset import DataError, EvalCase, load_dataset, load_dataset_files, load_dataset_with_stats
from .experiment import ConfigError, EvalReport, MethodSpec, default_methods, run_experiment, topk_accuracy
from .synth import SynthConfig, SyntheticDataset, generate_synthetic
