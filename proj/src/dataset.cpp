#include "nlc/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

#include "nlc/errors.hpp"
#include "nlc/rng.hpp"

namespace nlc {

namespace {

std::vector<std::string> split_fields(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::string field;
    std::istringstream ss(line);
    while (std::getline(ss, field, sep)) out.push_back(field);
    if (!line.empty() && line.back() == sep) out.emplace_back();
    return out;
}

double parse_double(const std::string& s, std::size_t line_no) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ParseError("line " + std::to_string(line_no) + ": bad real value '" + s + "'");
    }
}

int parse_label(const std::string& s, std::size_t line_no) {
    try {
        std::size_t pos = 0;
        const int v = std::stoi(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ParseError("line " + std::to_string(line_no) + ": bad label '" + s + "'");
    }
}

}  // namespace

std::optional<double> LabeledDataset::label_accuracy() const {
    if (!clean_labels) return std::nullopt;
    if (clean_labels->empty()) return std::nullopt;
    std::size_t hits = 0;
    for (std::size_t i = 0; i < current_labels.size(); ++i)
        if (current_labels[i] == (*clean_labels)[i]) ++hits;
    return static_cast<double>(hits) / static_cast<double>(current_labels.size());
}

GeneratedBlobs gen_gaussian_blobs(std::size_t num_classes, std::size_t per_class,
                                  std::size_t dim, double separation, double spread,
                                  std::uint64_t seed) {
    if (num_classes < 2) throw ConfigError("blob generation needs at least 2 classes");
    if (per_class < 1) throw ConfigError("per_class must be at least 1");
    if (dim < 2) throw ConfigError("blob generation needs dim >= 2");
    if (separation <= 0.0) throw ConfigError("separation must be positive");
    if (spread < 0.0) throw ConfigError("spread must be non-negative");

    auto rng = make_rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);

    // centers drawn isotropically, then rescaled so the closest pair sits at
    // exactly `separation`; task difficulty is then stable across seeds
    Matrix centers(num_classes, dim);
    for (double& v : centers.storage()) v = gauss(rng);
    double min_dist_sq = std::numeric_limits<double>::max();
    for (std::size_t a = 0; a < num_classes; ++a) {
        for (std::size_t b = a + 1; b < num_classes; ++b) {
            double d2 = 0.0;
            for (std::size_t j = 0; j < dim; ++j) {
                const double diff = centers(a, j) - centers(b, j);
                d2 += diff * diff;
            }
            min_dist_sq = std::min(min_dist_sq, d2);
        }
    }
    const double scale = separation / std::sqrt(min_dist_sq);
    for (double& v : centers.storage()) v *= scale;

    GeneratedBlobs out;
    out.features = Matrix(num_classes * per_class, dim);
    out.clean_labels.resize(num_classes * per_class);
    std::size_t row = 0;
    for (std::size_t c = 0; c < num_classes; ++c) {
        for (std::size_t i = 0; i < per_class; ++i, ++row) {
            for (std::size_t j = 0; j < dim; ++j)
                out.features(row, j) = centers(c, j) + spread * gauss(rng);
            out.clean_labels[row] = static_cast<int>(c);
        }
    }
    return out;
}

LabeledDataset make_noisy_dataset(Matrix features, const std::vector<int>& clean_labels,
                                  const TransitionMatrix& q, std::uint64_t seed) {
    if (features.rows() != clean_labels.size())
        throw DimensionError("feature rows do not match label count");

    LabeledDataset ds;
    ds.num_classes = q.num_classes();
    ds.original_noisy_labels = apply_noise(clean_labels, q, seed);
    ds.current_labels = ds.original_noisy_labels;
    ds.clean_labels = clean_labels;
    ds.features = std::move(features);
    return ds;
}

LabeledDataset dataset_from_clean(Matrix features, std::vector<int> clean_labels,
                                  std::size_t num_classes) {
    if (features.rows() != clean_labels.size())
        throw DimensionError("feature rows do not match label count");
    for (int y : clean_labels)
        if (y < 0 || static_cast<std::size_t>(y) >= num_classes)
            throw IndexError("label " + std::to_string(y) + " out of range [0, " +
                             std::to_string(num_classes) + ")");

    LabeledDataset ds;
    ds.num_classes = num_classes;
    ds.features = std::move(features);
    ds.current_labels = clean_labels;
    ds.original_noisy_labels = clean_labels;
    ds.clean_labels = std::move(clean_labels);
    return ds;
}

LabeledDataset load_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open dataset file: " + path);

    std::string line;
    std::size_t line_no = 0;
    std::optional<std::size_t> declared_classes;

    // metadata/comment lines before the header
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        if (line[0] != '#') break;
        const auto eq = line.find('=');
        if (line.find("num_classes") != std::string::npos && eq != std::string::npos)
            declared_classes = static_cast<std::size_t>(parse_label(line.substr(eq + 1), line_no));
    }
    if (line.empty() && in.eof()) throw ParseError("dataset file has no header: " + path);

    const auto header = split_fields(line, ',');
    std::size_t dim = 0;
    while (dim < header.size() && header[dim] == "f" + std::to_string(dim)) ++dim;
    if (dim == 0 || dim >= header.size() || header[dim] != "label")
        throw ParseError("line " + std::to_string(line_no) +
                         ": header must be f0,...,f{d-1},label[,clean_label]");
    bool has_clean = false;
    if (header.size() == dim + 2) {
        if (header[dim + 1] != "clean_label")
            throw ParseError("line " + std::to_string(line_no) + ": unexpected column '" +
                             header[dim + 1] + "'");
        has_clean = true;
    } else if (header.size() != dim + 1) {
        throw ParseError("line " + std::to_string(line_no) + ": too many columns in header");
    }

    std::vector<double> values;
    std::vector<int> labels;
    std::vector<int> clean;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto fields = split_fields(line, ',');
        if (fields.size() != header.size())
            throw ParseError("line " + std::to_string(line_no) + ": expected " +
                             std::to_string(header.size()) + " fields, got " +
                             std::to_string(fields.size()));
        for (std::size_t j = 0; j < dim; ++j) values.push_back(parse_double(fields[j], line_no));
        labels.push_back(parse_label(fields[dim], line_no));
        if (has_clean) clean.push_back(parse_label(fields[dim + 1], line_no));
    }
    if (labels.empty()) throw ParseError("dataset file has no rows: " + path);

    int max_label = *std::max_element(labels.begin(), labels.end());
    int min_label = *std::min_element(labels.begin(), labels.end());
    if (has_clean) {
        max_label = std::max(max_label, *std::max_element(clean.begin(), clean.end()));
        min_label = std::min(min_label, *std::min_element(clean.begin(), clean.end()));
    }
    if (min_label < 0) throw ParseError("negative label in " + path);
    const std::size_t num_classes =
        declared_classes ? *declared_classes : static_cast<std::size_t>(max_label) + 1;
    if (static_cast<std::size_t>(max_label) >= num_classes)
        throw ParseError("label " + std::to_string(max_label) + " exceeds declared num_classes " +
                         std::to_string(num_classes));

    LabeledDataset ds;
    ds.num_classes = num_classes;
    ds.features = Matrix(labels.size(), dim);
    ds.features.storage() = std::move(values);
    ds.current_labels = labels;
    ds.original_noisy_labels = std::move(labels);
    if (has_clean) ds.clean_labels = std::move(clean);
    return ds;
}

void save_csv(const LabeledDataset& dataset, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ParseError("cannot write dataset file: " + path);

    out << "# num_classes=" << dataset.num_classes << '\n';
    for (std::size_t j = 0; j < dataset.dim(); ++j) out << 'f' << j << ',';
    out << "label";
    if (dataset.clean_labels) out << ",clean_label";
    out << '\n';

    char buf[32];
    for (std::size_t i = 0; i < dataset.size(); ++i) {
        for (std::size_t j = 0; j < dataset.dim(); ++j) {
            std::snprintf(buf, sizeof(buf), "%.17g", dataset.features(i, j));
            out << buf << ',';
        }
        out << dataset.current_labels[i];
        if (dataset.clean_labels) out << ',' << (*dataset.clean_labels)[i];
        out << '\n';
    }
    if (!out) throw ParseError("write failed: " + path);
}

SplitResult split(const LabeledDataset& dataset, double test_fraction, std::uint64_t seed) {
    if (!dataset.clean_labels)
        throw ConfigError("split needs clean labels for the test side");
    if (test_fraction <= 0.0 || test_fraction >= 1.0)
        throw ConfigError("test_fraction " + std::to_string(test_fraction) + " out of (0,1)");

    const std::size_t n = dataset.size();
    auto n_test = static_cast<std::size_t>(
        std::llround(test_fraction * static_cast<double>(n)));
    n_test = std::clamp<std::size_t>(n_test, 1, n - 1);

    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    auto rng = make_rng(mix_seed(seed, 0x5914));
    std::shuffle(idx.begin(), idx.end(), rng);

    std::vector<std::size_t> test_idx(idx.begin(), idx.begin() + static_cast<long>(n_test));
    std::vector<std::size_t> train_idx(idx.begin() + static_cast<long>(n_test), idx.end());
    std::sort(test_idx.begin(), test_idx.end());
    std::sort(train_idx.begin(), train_idx.end());

    SplitResult out;
    out.train.num_classes = dataset.num_classes;
    out.train.features = Matrix(train_idx.size(), dataset.dim());
    out.train.clean_labels.emplace();
    for (std::size_t r = 0; r < train_idx.size(); ++r) {
        const std::size_t src = train_idx[r];
        std::copy(dataset.features.row(src).begin(), dataset.features.row(src).end(),
                  out.train.features.row(r).begin());
        out.train.current_labels.push_back(dataset.current_labels[src]);
        out.train.original_noisy_labels.push_back(dataset.original_noisy_labels[src]);
        out.train.clean_labels->push_back((*dataset.clean_labels)[src]);
    }

    out.test.features = Matrix(test_idx.size(), dataset.dim());
    for (std::size_t r = 0; r < test_idx.size(); ++r) {
        const std::size_t src = test_idx[r];
        std::copy(dataset.features.row(src).begin(), dataset.features.row(src).end(),
                  out.test.features.row(r).begin());
        out.test.labels.push_back((*dataset.clean_labels)[src]);
    }
    return out;
}

}  // namespace nlc
