#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "nlc/matrix.hpp"
#include "nlc/noise.hpp"

namespace nlc {

// Training data with three label views: the mutable labels the trainer sees,
// the immutable noisy originals, and (when available) the hidden clean
// labels used only for evaluation. Training decisions must never read
// clean_labels.
struct LabeledDataset {
    Matrix features;                                // [N x d]
    std::vector<int> current_labels;                // mutable, starts = original
    std::vector<int> original_noisy_labels;         // frozen at construction
    std::optional<std::vector<int>> clean_labels;   // evaluation only
    std::size_t num_classes = 0;

    std::size_t size() const { return features.rows(); }
    std::size_t dim() const { return features.cols(); }

    // Fraction of current labels equal to the hidden clean labels; empty
    // when no clean labels are stored.
    std::optional<double> label_accuracy() const;
};

struct GeneratedBlobs {
    Matrix features;
    std::vector<int> clean_labels;
};

// Clean test targets for evaluation.
struct TestSet {
    Matrix features;
    std::vector<int> labels;
};

struct SplitResult {
    LabeledDataset train;
    TestSet test;
};

// Isotropic Gaussian clusters: random class centers rescaled so the closest
// pair is exactly `separation` apart, points ~ N(center, spread^2 I),
// per_class points per class, class-major order.
GeneratedBlobs gen_gaussian_blobs(std::size_t num_classes, std::size_t per_class,
                                  std::size_t dim, double separation, double spread,
                                  std::uint64_t seed);

// Corrupts clean labels through the transition matrix once; the result keeps
// the clean labels read-only for evaluation.
LabeledDataset make_noisy_dataset(Matrix features, const std::vector<int>& clean_labels,
                                  const TransitionMatrix& q, std::uint64_t seed);

// Dataset with labels taken as-is (current = original = clean).
LabeledDataset dataset_from_clean(Matrix features, std::vector<int> clean_labels,
                                  std::size_t num_classes);

// CSV format: optional "# num_classes=C" line, header
// f0,...,f{d-1},label[,clean_label], one example per row.
LabeledDataset load_csv(const std::string& path);
void save_csv(const LabeledDataset& dataset, const std::string& path);

// Seeded shuffle split; the test side exposes clean labels as its targets.
SplitResult split(const LabeledDataset& dataset, double test_fraction, std::uint64_t seed);

}  // namespace nlc
