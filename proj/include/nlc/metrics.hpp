#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace nlc {

// One per-epoch log row. wall_ms is measured in memory but serialized as
// null so metrics files stay byte-identical across reruns of the same seed;
// timing for humans goes to the console instead.
struct MetricsRecord {
    int epoch = 0;
    std::string stage;  // "iterative" or "finetune"
    std::string mode;
    int k = 0;
    double tau_est = 0.0;
    double lambda = 0.0;
    double acc1 = 0.0;
    double acc2 = 0.0;
    double mean_acc = 0.0;
    double disagreement_rate = 0.0;
    std::optional<double> label_acc;
    int num_corrected_this_event = 0;
    bool retrained = false;
    std::optional<double> wall_ms;
};

nlohmann::ordered_json record_to_json(const MetricsRecord& record);
MetricsRecord record_from_json(const nlohmann::json& j);

// Best/last mean test accuracy over a run; null fields when empty.
nlohmann::ordered_json summary_json(const std::vector<MetricsRecord>& records);

// JSON-lines: one object per record, then a summary line. The overload with
// a repro object writes it as the first line.
void write_metrics(const std::vector<MetricsRecord>& records, const std::string& path);
void write_metrics(const std::vector<MetricsRecord>& records, const std::string& path,
                   const nlohmann::ordered_json& repro);

}  // namespace nlc
