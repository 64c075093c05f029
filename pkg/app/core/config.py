import logging
from dataclasses import dataclass, field
from os import getenv
from typing import List, Optional

from dotenv import load_dotenv

from app.core.errors import ConfigError

load_dotenv()


# --- Component Dataclasses ---

@dataclass
class Messages:
    """Container for all user-facing CLI messages for easy customization."""
    # --- General ---
    extract_done: str = "Extracted {rows} of {total} images into {path} (dim {dim})."
    train_done: str = "Model saved to {path} ({solver} solver, {kernel} kernel)."
    metrics_line: str = (
        "accuracy={accuracy:.4f} precision={precision:.4f} recall={recall:.4f} "
        "specificity={specificity:.4f} fpr={fpr:.4f} auc={auc}"
    )
    inspect_done: str = "Wrote code maps and feature CSV for {image} to {out_dir}."
    equalize_done: str = "Wrote equalized image to {image} and histogram to {histogram}."

    # --- Errors & Warnings ---
    empty_manifest: str = "Manifest {path} lists no images."
    all_rows_failed: str = "None of the {total} images in {path} could be processed."
    image_skipped: str = "Skipping {path}: {reason}"
    single_class: str = "Training needs both labels; {path} only contains label {label}."
    cv_class_guard: str = (
        "{k}-fold cross-validation needs at least {k} samples of every class; "
        "class {label} has {count}."
    )
    header_mismatch: str = (
        "Store and model disagree: store has dim {store_dim} (bins {store_bins}, {store_descriptor}), "
        "model expects dim {model_dim} (bins {model_bins}, {model_descriptor})."
    )
    command_failed: str = "Command '{command}' failed: {error}"


# --- Main Settings Class ---

def _int_env(name: str, default: int) -> int:
    raw = getenv(name)
    if raw is None or raw.strip() == "":
        return default
    try:
        return int(raw)
    except ValueError:
        raise ConfigError(f"{name} must be an integer, got {raw!r}.")


@dataclass
class Settings:
    """Main container for all application settings."""
    # --- Environment-driven settings ---
    seed: int = field(init=False)
    jobs: int = field(init=False)
    canonical_size: int = field(init=False)
    log_level: str = field(init=False)

    # --- Descriptor ---
    default_bins: int = 256
    compat_bins: int = 50
    allowed_bins: List[int] = field(default_factory=lambda: [256, 50])
    descriptors: List[str] = field(default_factory=lambda: ["ltridp", "lbp"])
    descriptor_version: int = 1

    # --- SVM ---
    default_kernel: str = "gaussian"
    kernels: List[str] = field(default_factory=lambda: ["linear", "quadratic", "gaussian", "cubic"])
    c: float = 1.0
    tol: float = 1e-3
    max_passes: int = 10
    coef0: float = 1.0
    gamma: Optional[float] = None  # None means 1 / feature_dim
    epochs_per_sample: int = 50

    # --- Evaluation ---
    cv_folds: int = 10
    train_fraction_tenths: int = 7
    validation_schemes: List[str] = field(default_factory=lambda: ["split70", "cv10", "none"])

    # --- Files ---
    model_format_version: int = 1
    label_names: dict = field(default_factory=lambda: {1: "bag", -1: "nobag"})

    messages: Messages = field(default_factory=Messages, init=False)

    def __post_init__(self):
        """Load environment-driven settings after initialization."""
        self.seed = _int_env("LTRIDP_SEED", 42)
        self.jobs = max(1, _int_env("LTRIDP_JOBS", 1))
        self.canonical_size = _int_env("LTRIDP_CANONICAL_SIZE", 256)
        if self.canonical_size < 3:
            raise ConfigError("LTRIDP_CANONICAL_SIZE must be at least 3.")
        self.log_level = (getenv("LTRIDP_LOG_LEVEL") or "INFO").upper()
        if not isinstance(logging.getLevelName(self.log_level), int):
            raise ConfigError(f"LTRIDP_LOG_LEVEL {self.log_level!r} is not a logging level.")


# --- Global Instances ---

settings = Settings()
