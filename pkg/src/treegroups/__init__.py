"""Exact computations with groups acting on the d-adic rooted tree."""

__version__ = "0.1.0"

from .tree import Portrait, compose, invert, parse_portrait, format_portrait, section, truncate
from .engine import FiniteTreeGroup, enumerate_closure, full_group, stabilizer, is_level_transitive
from .constructions import GSSpec, gh_group, gs_group, lemma_group, affine_model, pattern_group, finite_type_check
from .spectra import fpp_report, martingale_criterion, hdim_sequence, bad_cosets, process_sample
from .kernels import backend, use_backend

__all__ = [
    "Portrait", "compose", "invert", "parse_portrait", "format_portrait", "section", "truncate",
    "FiniteTreeGroup", "enumerate_closure", "full_group", "stabilizer", "is_level_transitive",
    "GSSpec", "gh_group", "gs_group", "lemma_group", "affine_model", "pattern_group", "finite_type_check",
    "fpp_report", "martingale_criterion", "hdim_sequence", "bad_cosets", "process_sample",
    "backend", "use_backend",
]
