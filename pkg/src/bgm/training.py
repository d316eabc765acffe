"""Training samples from bridges, and the classifier that learns from them.

A bridge (s, t) becomes the vector [f_1(s)..f_n(s), r_s, f_1(t)..f_m(t), r_t]
with the target rating r_t as the class label.  The default classifier is a
categorical naive Bayes with add-one smoothing: continuous features are
discretized into equal-width bins fitted on the training data, and the source
rating rides along as one categorical feature.  Training and prediction are
deterministic, and a model serializes to JSON and back without changing a
single predicted probability.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

from .dataset import ContentCatalog
from .errors import ConfigError, TrainingError, ValidationError
from .matching import Bridge

NAIVE_BAYES = "naive_bayes"


@dataclass(frozen=True)
class TrainingSample:
    """One supervised example; width is n + m + 2 counting the label."""

    source_features: tuple[float, ...]
    source_rating: int
    target_features: tuple[float, ...]
    label: int

    @property
    def width(self) -> int:
        return len(self.source_features) + len(self.target_features) + 2

    def as_row(self) -> tuple[float, ...]:
        return (
            *self.source_features,
            float(self.source_rating),
            *self.target_features,
            float(self.label),
        )


def build_training_set(
    bridges: Iterable[Bridge],
    source_content: ContentCatalog,
    target_content: ContentCatalog,
) -> list[TrainingSample]:
    """Materialize one sample per bridge, in bridge order."""
    samples = []
    for bridge in bridges:
        samples.append(
            TrainingSample(
                source_features=source_content.vector(bridge.source_node.item_id),
                source_rating=bridge.source_node.rating,
                target_features=target_content.vector(bridge.target_node.item_id),
                label=bridge.target_node.rating,
            )
        )
    return samples


@dataclass(frozen=True)
class TrainConfig:
    k_source: int
    k_target: int
    classifier: str = NAIVE_BAYES
    bins: int = 5
    min_samples: int = 10

    def __post_init__(self) -> None:
        if self.k_source < 1 or self.k_target < 1:
            raise ConfigError(
                f"k_source and k_target must be >= 1, got {self.k_source}, {self.k_target}"
            )
        if self.bins < 1:
            raise ConfigError(f"bins must be >= 1, got {self.bins}")
        if self.min_samples < 1:
            raise ConfigError(f"min_samples must be >= 1, got {self.min_samples}")
        if self.classifier != NAIVE_BAYES:
            raise ConfigError(f"unknown classifier {self.classifier!r}")


@dataclass(frozen=True)
class DistributionVector:
    """Probabilities over the rating classes 1..k, in order."""

    probabilities: tuple[float, ...]

    def __post_init__(self) -> None:
        if any(p < 0.0 for p in self.probabilities):
            raise ValidationError("class probabilities must be non-negative")
        total = sum(self.probabilities)
        if abs(total - 1.0) > 1e-9:
            raise ValidationError(f"class probabilities sum to {total}, expected 1")

    def __len__(self) -> int:
        return len(self.probabilities)

    def __getitem__(self, index: int) -> float:
        return self.probabilities[index]

    def __iter__(self):
        return iter(self.probabilities)


class NaiveBayesModel:
    """Categorical naive Bayes over binned features, with add-one smoothing.

    Feature layout: n binned source features, then the source rating as a
    categorical feature with k_source values, then m binned target features.
    ``bin_edges`` stores the fitted (low, high) range per continuous feature;
    values outside the range clip into the boundary bins.  A bin that no
    training sample occupied is skipped at prediction time, which leaves the
    smoothed prior in charge when nothing else is informative.
    """

    def __init__(
        self,
        k_source: int,
        k_target: int,
        bins: int,
        bin_edges: list[tuple[float, float]],
        n: int,
        m: int,
        class_counts: list[int],
        feature_counts: list[list[list[int]]],
        sample_count: int,
    ) -> None:
        self.k_source = k_source
        self.k_target = k_target
        self.bins = bins
        self.bin_edges = bin_edges
        self.n = n
        self.m = m
        self.class_counts = class_counts
        self.feature_counts = feature_counts  # [feature][value][class]
        self.sample_count = sample_count

    # -- feature encoding ---------------------------------------------------

    def _bin_index(self, feature: int, value: float) -> int:
        low, high = self.bin_edges[feature]
        if high <= low:
            return 0
        position = int((value - low) / (high - low) * self.bins)
        return min(max(position, 0), self.bins - 1)

    def feature_cardinality(self, feature: int) -> int:
        return self.k_source if feature == self.n else self.bins

    def encode(
        self,
        source_features: Sequence[float],
        source_rating: int,
        target_features: Sequence[float],
    ) -> list[int]:
        if len(source_features) != self.n:
            raise ValidationError(
                f"expected {self.n} source features, got {len(source_features)}"
            )
        if len(target_features) != self.m:
            raise ValidationError(
                f"expected {self.m} target features, got {len(target_features)}"
            )
        if not 1 <= source_rating <= self.k_source:
            raise ValidationError(
                f"source rating {source_rating} outside 1..{self.k_source}"
            )
        encoded = [self._bin_index(i, v) for i, v in enumerate(source_features)]
        encoded.append(source_rating - 1)
        offset = self.n
        encoded.extend(
            self._bin_index(offset + j, v) for j, v in enumerate(target_features)
        )
        return encoded

    # -- probability tables -------------------------------------------------

    def log_prior(self) -> list[float]:
        total = self.sample_count + self.k_target
        return [
            math.log((count + 1) / total) for count in self.class_counts
        ]

    def log_likelihood_tables(self) -> list[list[list[float]]]:
        """Per feature: [value][class] log likelihoods, zeros where a value is skipped."""
        tables = []
        for feature, value_counts in enumerate(self.feature_counts):
            cardinality = self.feature_cardinality(feature)
            table = []
            for counts in value_counts:
                if sum(counts) == 0:
                    table.append([0.0] * self.k_target)
                    continue
                table.append(
                    [
                        math.log(
                            (counts[c] + 1) / (self.class_counts[c] + cardinality)
                        )
                        for c in range(self.k_target)
                    ]
                )
            tables.append(table)
        return tables

    def predict_distribution(
        self,
        source_features: Sequence[float],
        source_rating: int,
        target_features: Sequence[float],
    ) -> DistributionVector:
        encoded = self.encode(source_features, source_rating, target_features)
        log_scores = self.log_prior()
        for feature, value in enumerate(encoded):
            counts = self.feature_counts[feature][value]
            if sum(counts) == 0:
                continue  # unseen bin: uninformative, fall back to the rest
            cardinality = self.feature_cardinality(feature)
            for c in range(self.k_target):
                log_scores[c] += math.log(
                    (counts[c] + 1) / (self.class_counts[c] + cardinality)
                )
        peak = max(log_scores)
        weights = [math.exp(score - peak) for score in log_scores]
        total = sum(weights)
        return DistributionVector(tuple(w / total for w in weights))

    # -- persistence ----------------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "classifier": NAIVE_BAYES,
            "k_source": self.k_source,
            "k_target": self.k_target,
            "bins": self.bins,
            "bin_edges": [[low, high] for low, high in self.bin_edges],
            "n": self.n,
            "m": self.m,
            "class_counts": self.class_counts,
            "feature_counts": self.feature_counts,
            "sample_count": self.sample_count,
        }

    @classmethod
    def from_dict(cls, payload: dict) -> "NaiveBayesModel":
        try:
            if payload["classifier"] != NAIVE_BAYES:
                raise ConfigError(f"unknown classifier {payload['classifier']!r}")
            return cls(
                k_source=payload["k_source"],
                k_target=payload["k_target"],
                bins=payload["bins"],
                bin_edges=[(low, high) for low, high in payload["bin_edges"]],
                n=payload["n"],
                m=payload["m"],
                class_counts=payload["class_counts"],
                feature_counts=payload["feature_counts"],
                sample_count=payload["sample_count"],
            )
        except KeyError as missing:
            raise ValidationError(f"model payload missing field {missing}") from None

    def save(self, path: str) -> None:
        with open(path, "w", encoding="utf-8") as handle:
            json.dump(self.to_dict(), handle, sort_keys=True, indent=2)
            handle.write("\n")

    @classmethod
    def load(cls, path: str) -> "NaiveBayesModel":
        with open(path, encoding="utf-8") as handle:
            return cls.from_dict(json.load(handle))


def train(samples: Sequence[TrainingSample], config: TrainConfig) -> NaiveBayesModel:
    """Fit the classifier; permutation of the samples cannot change the model."""
    if not samples:
        raise TrainingError("training set is empty")
    if len(samples) < config.min_samples:
        raise TrainingError(
            f"training set has {len(samples)} samples, configured minimum is "
            f"{config.min_samples}"
        )
    n = len(samples[0].source_features)
    m = len(samples[0].target_features)
    for sample in samples:
        if len(sample.source_features) != n or len(sample.target_features) != m:
            raise ValidationError("training samples have inconsistent feature widths")
        if not 1 <= sample.label <= config.k_target:
            raise ValidationError(
                f"label {sample.label} outside 1..{config.k_target}"
            )
        if not 1 <= sample.source_rating <= config.k_source:
            raise ValidationError(
                f"source rating {sample.source_rating} outside 1..{config.k_source}"
            )

    bin_edges: list[tuple[float, float]] = []
    for i in range(n):
        values = [s.source_features[i] for s in samples]
        bin_edges.append((min(values), max(values)))
    for j in range(m):
        values = [s.target_features[j] for s in samples]
        bin_edges.append((min(values), max(values)))

    model = NaiveBayesModel(
        k_source=config.k_source,
        k_target=config.k_target,
        bins=config.bins,
        bin_edges=bin_edges,
        n=n,
        m=m,
        class_counts=[0] * config.k_target,
        feature_counts=[
            [[0] * config.k_target for _ in range(config.bins)] for _ in range(n)
        ]
        + [[[0] * config.k_target for _ in range(config.k_source)]]
        + [[[0] * config.k_target for _ in range(config.bins)] for _ in range(m)],
        sample_count=len(samples),
    )
    for sample in samples:
        encoded = model.encode(
            sample.source_features, sample.source_rating, sample.target_features
        )
        class_index = sample.label - 1
        model.class_counts[class_index] += 1
        for feature, value in enumerate(encoded):
            model.feature_counts[feature][value][class_index] += 1
    return model


TRAINING_HEADER_PREFIX = "s"


def training_header(n: int, m: int) -> list[str]:
    return (
        [f"s{i + 1}" for i in range(n)]
        + ["src_rating"]
        + [f"t{j + 1}" for j in range(m)]
        + ["label"]
    )


def export_training_set(samples: Sequence[TrainingSample], path: str) -> None:
    """Write samples as delimited rows in the [source | r_s | target | label] layout."""
    import csv

    if not samples:
        raise TrainingError("training set is empty")
    n = len(samples[0].source_features)
    m = len(samples[0].target_features)
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(training_header(n, m))
        for sample in samples:
            writer.writerow(
                [repr(v) for v in sample.source_features]
                + [sample.source_rating]
                + [repr(v) for v in sample.target_features]
                + [sample.label]
            )


def load_training_set(path: str) -> list[TrainingSample]:
    import csv

    from .errors import ParseError

    samples: list[TrainingSample] = []
    with open(path, newline="", encoding="utf-8") as handle:
        reader = csv.reader(handle)
        header = next(reader, None)
        if header is None or "src_rating" not in header or header[-1] != "label":
            raise ParseError(f"{path}: line 1: not a training-sample export")
        rating_column = header.index("src_rating")
        n = rating_column
        m = len(header) - n - 2
        for line_number, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise ParseError(f"{path}: line {line_number}: expected "
                                 f"{len(header)} fields, got {len(row)}")
            try:
                samples.append(
                    TrainingSample(
                        source_features=tuple(float(v) for v in row[:n]),
                        source_rating=int(row[n]),
                        target_features=tuple(float(v) for v in row[n + 1 : n + 1 + m]),
                        label=int(row[-1]),
                    )
                )
            except ValueError:
                raise ParseError(f"{path}: line {line_number}: bad row {row!r}") from None
    return samples
