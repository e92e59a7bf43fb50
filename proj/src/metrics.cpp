#include "nlc/metrics.hpp"

#include <algorithm>
#include <fstream>

#include "nlc/errors.hpp"

namespace nlc {

using nlohmann::json;
using nlohmann::ordered_json;

ordered_json record_to_json(const MetricsRecord& r) {
    ordered_json j;
    j["epoch"] = r.epoch;
    j["stage"] = r.stage;
    j["mode"] = r.mode;
    j["k"] = r.k;
    j["tau_est"] = r.tau_est;
    j["lambda"] = r.lambda;
    j["acc1"] = r.acc1;
    j["acc2"] = r.acc2;
    j["mean_acc"] = r.mean_acc;
    j["disagreement_rate"] = r.disagreement_rate;
    if (r.label_acc)
        j["label_acc"] = *r.label_acc;
    else
        j["label_acc"] = nullptr;
    j["num_corrected_this_event"] = r.num_corrected_this_event;
    j["retrained"] = r.retrained;
    j["wall_ms"] = nullptr;  // timing is not part of the reproducible artifact
    return j;
}

MetricsRecord record_from_json(const json& j) {
    MetricsRecord r;
    r.epoch = j.at("epoch").get<int>();
    r.stage = j.at("stage").get<std::string>();
    r.mode = j.at("mode").get<std::string>();
    r.k = j.at("k").get<int>();
    r.tau_est = j.at("tau_est").get<double>();
    r.lambda = j.at("lambda").get<double>();
    r.acc1 = j.at("acc1").get<double>();
    r.acc2 = j.at("acc2").get<double>();
    r.mean_acc = j.at("mean_acc").get<double>();
    r.disagreement_rate = j.at("disagreement_rate").get<double>();
    if (!j.at("label_acc").is_null()) r.label_acc = j.at("label_acc").get<double>();
    r.num_corrected_this_event = j.at("num_corrected_this_event").get<int>();
    r.retrained = j.at("retrained").get<bool>();
    if (!j.at("wall_ms").is_null()) r.wall_ms = j.at("wall_ms").get<double>();
    return r;
}

ordered_json summary_json(const std::vector<MetricsRecord>& records) {
    ordered_json j;
    if (records.empty()) {
        j["best_mean_acc"] = nullptr;
        j["last_mean_acc"] = nullptr;
    } else {
        const auto best = std::max_element(
            records.begin(), records.end(),
            [](const MetricsRecord& a, const MetricsRecord& b) { return a.mean_acc < b.mean_acc; });
        j["best_mean_acc"] = best->mean_acc;
        j["last_mean_acc"] = records.back().mean_acc;
    }
    return j;
}

namespace {

void write_lines(const std::vector<MetricsRecord>& records, const std::string& path,
                 const ordered_json* repro) {
    std::ofstream out(path);
    if (!out) throw ParseError("cannot write metrics file: " + path);
    if (repro) out << repro->dump() << '\n';
    for (const auto& r : records) out << record_to_json(r).dump() << '\n';
    out << summary_json(records).dump() << '\n';
    if (!out) throw ParseError("write failed: " + path);
}

}  // namespace

void write_metrics(const std::vector<MetricsRecord>& records, const std::string& path) {
    write_lines(records, path, nullptr);
}

void write_metrics(const std::vector<MetricsRecord>& records, const std::string& path,
                   const ordered_json& repro) {
    write_lines(records, path, &repro);
}

}  // namespace nlc
