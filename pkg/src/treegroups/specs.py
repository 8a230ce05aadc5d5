"""Symbolic group descriptions and their YAML config form.

Every spec exposes ``family``, ``degree``, ``build(depth, cap)``,
``order(depth)`` (``None`` when only enumeration can tell), ``sampler(depth)``
and ``echo()`` (a plain dict that round-trips through :func:`spec_from_dict`).

Config documents::

    family: lemma          # generators | pattern | gs | lemma | gh | affine
    degree: 2
    part: G                # lemma and affine: G or H

    family: generators
    degree: 2
    generators: ["10[e,e]", "e[10,e]"]

    family: pattern
    degree: 2
    pattern: full          # full | trivial | {depth: D, generators: [...]}

    family: gs
    degree: 3
    sigma: "120"           # optional; a d-cycle, default i -> i+1

    family: gh
    outer: {family: affine, degree: 3, part: G}
    inner: {family: affine, degree: 3, part: H}
    require_normal: false  # optional, default true
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
import yaml

from . import leafops as lo
from .constructions import (
    GSSpec,
    PatternSet,
    affine_model,
    affine_pattern,
    gh_group,
    lemma_group,
    lemma_order,
    lemma_sampler,
    pattern_group,
    pattern_order,
)
from .engine import DEFAULT_CAP, FiniteTreeGroup, IndexSampler, enumerate_closure
from .errors import ConfigError, SamplerError
from .tree import Portrait, format_portrait, num_labels, parse_portrait, PortraitParseError, truncate

FAMILIES = ("generators", "pattern", "gs", "lemma", "gh", "affine")


class LabelwiseSampler:
    """Independent uniform labels from a fixed permutation set (depth-1 patterns)."""

    kind = "labelwise"

    def __init__(self, perms: np.ndarray, depth: int):
        self.perms = np.asarray(perms, dtype=lo.DTYPE)
        self.degree = self.perms.shape[1]
        self.depth = depth

    def sample_rows(self, rng: np.random.Generator, size: int) -> np.ndarray:
        d, n = self.degree, self.depth
        pick = rng.integers(0, self.perms.shape[0], size=(size, num_labels(d, n)))
        return lo.rows_from_labels(self.perms[pick], d, n)


class _Enumerated:
    """Default behaviour: no closed-form order, sample by indexing the enumeration."""

    def order(self, depth: int) -> int | None:
        return None

    def sampler(self, depth: int):
        return IndexSampler(self.build(depth))


@dataclass(frozen=True)
class GeneratorsSpec(_Enumerated):
    degree: int
    generators: tuple[Portrait, ...]

    family = "generators"

    def build(self, depth: int, cap: int = DEFAULT_CAP) -> FiniteTreeGroup:
        gens = [truncate(g, depth) for g in self.generators]
        return enumerate_closure(gens, depth, cap, degree=self.degree, name="generated")

    def echo(self) -> dict:
        return {"family": "generators", "degree": self.degree,
                "generators": [format_portrait(g) for g in self.generators]}


@dataclass(frozen=True)
class PatternSpec:
    degree: int
    kind: str  # full | trivial | generated
    pattern_depth: int = 1
    generators: tuple[Portrait, ...] = ()

    family = "pattern"

    @property
    def pattern(self) -> PatternSet:
        cached = self.__dict__.get("_pattern")
        if cached is None:
            if self.kind == "full":
                cached = PatternSet.full(self.degree, self.pattern_depth)
            elif self.kind == "trivial":
                cached = PatternSet.trivial(self.degree, self.pattern_depth)
            else:
                cached = PatternSet.from_portraits(list(self.generators))
            object.__setattr__(self, "_pattern", cached)
        return cached

    def build(self, depth: int, cap: int = DEFAULT_CAP) -> FiniteTreeGroup:
        if depth < self.pattern_depth:
            return self.build(self.pattern_depth, cap).truncate(depth)
        return pattern_group(self.pattern, depth, cap)

    def order(self, depth: int) -> int | None:
        if depth < self.pattern_depth:
            return None
        return pattern_order(self.pattern, depth)

    def sampler(self, depth: int):
        if self.pattern_depth == 1:
            return LabelwiseSampler(self.pattern.group.rows, depth)
        return IndexSampler(self.build(depth))

    def echo(self) -> dict:
        out = {"family": "pattern", "degree": self.degree}
        if self.kind == "generated":
            out["pattern"] = {"depth": self.pattern_depth,
                              "generators": [format_portrait(g) for g in self.generators]}
        else:
            out["pattern"] = self.kind if self.pattern_depth == 1 else {"kind": self.kind, "depth": self.pattern_depth}
        return out


@dataclass(frozen=True)
class LemmaSpec:
    degree: int
    part: str = "G"

    family = "lemma"

    def build(self, depth: int, cap: int = DEFAULT_CAP) -> FiniteTreeGroup:
        if depth < 2:
            return self.build(2, cap).truncate(depth)
        groups = lemma_group(self.degree, depth, cap)
        return groups.G if self.part == "G" else groups.H

    def order(self, depth: int) -> int | None:
        if self.part == "H":
            return GSSpec(self.degree).order(depth)
        try:
            return lemma_order(self.degree, depth)
        except ValueError:
            return None

    def sampler(self, depth: int):
        if self.part == "H":
            return GSSpec(self.degree).sampler(depth)
        try:
            return lemma_sampler(self.degree, depth)
        except SamplerError:
            return IndexSampler(self.build(depth))

    def echo(self) -> dict:
        return {"family": "lemma", "degree": self.degree, "part": self.part}


@dataclass(frozen=True)
class GHSpec(_Enumerated):
    outer: object
    inner: object
    require_normal: bool = True

    family = "gh"

    @property
    def degree(self) -> int:
        return self.outer.degree

    def build(self, depth: int, cap: int = DEFAULT_CAP) -> FiniteTreeGroup:
        return gh_group(self.outer.build(depth, cap), self.inner.build(depth, cap), self.require_normal)

    def echo(self) -> dict:
        return {"family": "gh", "outer": self.outer.echo(), "inner": self.inner.echo(),
                "require_normal": self.require_normal}


@dataclass(frozen=True)
class AffineSpec:
    degree: int
    part: str = "G"

    family = "affine"

    def build(self, depth: int, cap: int = DEFAULT_CAP) -> FiniteTreeGroup:
        return affine_model(self.degree, depth, self.part, cap)

    def order(self, depth: int) -> int:
        return len(affine_pattern(self.degree, self.part)) ** num_labels(self.degree, depth)

    def sampler(self, depth: int):
        return LabelwiseSampler(affine_pattern(self.degree, self.part).group.rows, depth)

    def echo(self) -> dict:
        return {"family": "affine", "degree": self.degree, "part": self.part}


# ------------------------------------------------------------------ parsing


def _require(doc: dict, key: str):
    if key not in doc:
        raise ConfigError(f"missing key {key!r} in {doc.get('family', 'spec')} config")
    return doc[key]


def _degree(doc: dict) -> int:
    d = _require(doc, "degree")
    if not isinstance(d, int) or isinstance(d, bool) or d < 2:
        raise ConfigError(f"degree must be an integer >= 2, got {d!r}")
    return d


def _part(doc: dict) -> str:
    part = str(doc.get("part", "G"))
    if part not in ("G", "H"):
        raise ConfigError(f"part must be G or H, got {part!r}")
    return part


def _portraits(texts, d: int) -> tuple[Portrait, ...]:
    if not isinstance(texts, list) or not texts:
        raise ConfigError("generators must be a non-empty list of portrait strings")
    try:
        gens = tuple(parse_portrait(str(t), degree=d) for t in texts)
    except (PortraitParseError, ValueError) as exc:
        raise ConfigError(f"bad portrait: {exc}") from exc
    depth = max(g.depth for g in gens)
    # shallower generators act trivially below their last labelled level
    return tuple(parse_portrait(format_portrait(g), degree=d, depth=depth) for g in gens)


def spec_from_dict(doc) -> object:
    if not isinstance(doc, dict):
        raise ConfigError("a spec must be a mapping")
    family = _require(doc, "family")
    if family not in FAMILIES:
        raise ConfigError(f"unknown family {family!r}; expected one of {', '.join(FAMILIES)}")
    if family == "generators":
        d = _degree(doc)
        return GeneratorsSpec(d, _portraits(_require(doc, "generators"), d))
    if family == "pattern":
        d = _degree(doc)
        pat = _require(doc, "pattern")
        if pat in ("full", "trivial"):
            return PatternSpec(d, pat)
        if isinstance(pat, dict):
            depth = pat.get("depth", 1)
            if not isinstance(depth, int) or depth < 1:
                raise ConfigError(f"pattern depth must be a positive integer, got {depth!r}")
            kind = pat.get("kind")
            if kind in ("full", "trivial"):
                return PatternSpec(d, kind, depth)
            gens = _portraits(_require(pat, "generators"), d)
            if any(g.depth != depth for g in gens):
                gens = tuple(parse_portrait(format_portrait(g), degree=d, depth=depth) for g in gens)
            return PatternSpec(d, "generated", depth, gens)
        raise ConfigError("pattern must be 'full', 'trivial' or a mapping")
    if family == "gs":
        d = _degree(doc)
        sigma = doc.get("sigma")
        if sigma is not None:
            sigma = tuple(int(c) for c in str(sigma)) if isinstance(sigma, str) else tuple(sigma)
        try:
            return GSSpec(d, sigma)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
    if family == "lemma":
        return LemmaSpec(_degree(doc), _part(doc))
    if family == "affine":
        return AffineSpec(_degree(doc), _part(doc))
    outer = spec_from_dict(_require(doc, "outer"))
    inner = spec_from_dict(_require(doc, "inner"))
    if outer.degree != inner.degree:
        raise ConfigError(f"outer degree {outer.degree} != inner degree {inner.degree}")
    return GHSpec(outer, inner, bool(doc.get("require_normal", True)))


def load_spec(path: str | Path) -> object:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    return spec_from_dict(doc)
