#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "fedsim/errors.hpp"

namespace fedsim {

struct RoundRecord {
    int round = 0;  // 1-based
    double test_accuracy = 0.0;
    int num_active_start = 0;
    int num_participating = 0;
    int num_completed = 0;
    double mean_eta = 0.0;
    double total_energy_remaining = 0.0;

    bool operator==(const RoundRecord&) const = default;
};

struct DepletionRecord {
    int client_id = 0;
    std::optional<int> depletion_round;  // nullopt = survived all R rounds

    bool operator==(const DepletionRecord&) const = default;
};

struct MetricsLog {
    std::vector<RoundRecord> rounds;
    std::vector<DepletionRecord> depletions;

    bool operator==(const MetricsLog&) const = default;
};

struct RunSummary {
    double peak_accuracy = 0.0;
    int peak_round = 0;
    double final_accuracy = 0.0;
    std::uint64_t seed = 0;
    std::string config_fingerprint;
};

// Peak = max accuracy, earliest round on ties; final = last round.
inline RunSummary summarize_run(const std::vector<RoundRecord>& records) {
    if (records.empty()) throw config_error("summarize_run: no rounds");
    RunSummary s;
    s.peak_accuracy = records.front().test_accuracy;
    s.peak_round = records.front().round;
    for (const auto& r : records) {
        if (r.test_accuracy > s.peak_accuracy) {
            s.peak_accuracy = r.test_accuracy;
            s.peak_round = r.round;
        }
    }
    s.final_accuracy = records.back().test_accuracy;
    return s;
}

struct FieldStats {
    double mean = 0.0;
    double std = 0.0;  // sample standard deviation (n-1 denominator)
};

struct SeedStats {
    FieldStats peak_accuracy;
    FieldStats peak_round;
    FieldStats final_accuracy;
};

namespace detail {
inline FieldStats mean_and_sample_std(const std::vector<double>& xs) {
    const double n = static_cast<double>(xs.size());
    FieldStats f;
    for (double x : xs) f.mean += x;
    f.mean /= n;
    double ss = 0.0;
    for (double x : xs) ss += (x - f.mean) * (x - f.mean);
    f.std = std::sqrt(ss / (n - 1.0));
    return f;
}
}  // namespace detail

inline SeedStats aggregate_seeds(const std::vector<RunSummary>& summaries) {
    if (summaries.size() < 2) throw config_error("aggregate_seeds: need at least 2 summaries");
    std::vector<double> peaks, rounds, finals;
    for (const auto& s : summaries) {
        peaks.push_back(s.peak_accuracy);
        rounds.push_back(static_cast<double>(s.peak_round));
        finals.push_back(s.final_accuracy);
    }
    return {detail::mean_and_sample_std(peaks), detail::mean_and_sample_std(rounds),
            detail::mean_and_sample_std(finals)};
}

namespace detail {

// 17 significant digits: lossless double -> decimal -> double round trip.
inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline std::ofstream open_for_write(const std::string& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw io_error("cannot write " + path);
    return out;
}

}  // namespace detail

inline constexpr const char* kRoundCsvHeader =
    "round,test_accuracy,num_active_start,num_participating,num_completed,mean_eta,total_energy_remaining";

inline void write_round_csv(const std::vector<RoundRecord>& records, const std::string& path) {
    auto out = detail::open_for_write(path);
    out << kRoundCsvHeader << "\n";
    for (const auto& r : records) {
        out << r.round << ',' << detail::format_double(r.test_accuracy) << ',' << r.num_active_start
            << ',' << r.num_participating << ',' << r.num_completed << ','
            << detail::format_double(r.mean_eta) << ','
            << detail::format_double(r.total_energy_remaining) << "\n";
    }
    if (!out) throw io_error("write failed: " + path);
}

inline void write_depletion_csv(const std::vector<DepletionRecord>& records, const std::string& path) {
    auto out = detail::open_for_write(path);
    out << "client_id,depletion_round\n";
    for (const auto& r : records) {
        out << r.client_id << ',';
        if (r.depletion_round) out << *r.depletion_round;
        out << "\n";
    }
    if (!out) throw io_error("write failed: " + path);
}

inline std::vector<RoundRecord> read_round_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw io_error("cannot read " + path);
    std::string line;
    if (!std::getline(in, line)) throw parse_error("round csv: empty file " + path);
    std::vector<RoundRecord> records;
    long line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::istringstream iss(line);
        std::string tok;
        std::vector<std::string> toks;
        while (std::getline(iss, tok, ',')) toks.push_back(tok);
        if (toks.size() != 7) throw parse_error("round csv: expected 7 fields", line_no);
        RoundRecord r;
        r.round = std::stoi(toks[0]);
        r.test_accuracy = std::strtod(toks[1].c_str(), nullptr);
        r.num_active_start = std::stoi(toks[2]);
        r.num_participating = std::stoi(toks[3]);
        r.num_completed = std::stoi(toks[4]);
        r.mean_eta = std::strtod(toks[5].c_str(), nullptr);
        r.total_energy_remaining = std::strtod(toks[6].c_str(), nullptr);
        records.push_back(r);
    }
    return records;
}

inline std::vector<DepletionRecord> read_depletion_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw io_error("cannot read " + path);
    std::string line;
    if (!std::getline(in, line)) throw parse_error("depletion csv: empty file " + path);
    std::vector<DepletionRecord> records;
    long line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos) throw parse_error("depletion csv: expected 2 fields", line_no);
        DepletionRecord r;
        r.client_id = std::stoi(line.substr(0, comma));
        const std::string rest = line.substr(comma + 1);
        if (!rest.empty()) r.depletion_round = std::stoi(rest);
        records.push_back(r);
    }
    return records;
}

using json = nlohmann::ordered_json;

// Layout: { config, seeds: [ {seed, peak_accuracy, peak_round, final_accuracy} ],
// mean, std }. With a single seed the std entries are null.
inline json summary_to_json(const json& config, const std::vector<RunSummary>& summaries) {
    if (summaries.empty()) throw config_error("summary: no runs");
    json doc;
    doc["config"] = config;
    doc["seeds"] = json::array();
    for (const auto& s : summaries) {
        doc["seeds"].push_back({{"seed", s.seed},
                                {"peak_accuracy", s.peak_accuracy},
                                {"peak_round", s.peak_round},
                                {"final_accuracy", s.final_accuracy}});
    }
    if (summaries.size() >= 2) {
        const SeedStats stats = aggregate_seeds(summaries);
        doc["mean"] = {{"peak_accuracy", stats.peak_accuracy.mean},
                       {"peak_round", stats.peak_round.mean},
                       {"final_accuracy", stats.final_accuracy.mean}};
        doc["std"] = {{"peak_accuracy", stats.peak_accuracy.std},
                      {"peak_round", stats.peak_round.std},
                      {"final_accuracy", stats.final_accuracy.std}};
    } else {
        const auto& s = summaries.front();
        doc["mean"] = {{"peak_accuracy", s.peak_accuracy},
                       {"peak_round", static_cast<double>(s.peak_round)},
                       {"final_accuracy", s.final_accuracy}};
        doc["std"] = {{"peak_accuracy", nullptr}, {"peak_round", nullptr}, {"final_accuracy", nullptr}};
    }
    return doc;
}

inline void write_summary_json(const json& config, const std::vector<RunSummary>& summaries,
                               const std::string& path) {
    auto out = detail::open_for_write(path);
    out << summary_to_json(config, summaries).dump(2) << "\n";
    if (!out) throw io_error("write failed: " + path);
}

// Five-number summary with Tukey hinges (halves include the median when n is odd).
struct Quartiles {
    double min = 0.0, q1 = 0.0, median = 0.0, q3 = 0.0, max = 0.0;
};

inline Quartiles compute_quartiles(std::vector<double> values) {
    if (values.empty()) throw config_error("quartiles: empty input");
    std::sort(values.begin(), values.end());
    const auto median_of = [&](std::size_t lo, std::size_t hi) {  // [lo, hi)
        const std::size_t n = hi - lo;
        return n % 2 == 1 ? values[lo + n / 2]
                          : 0.5 * (values[lo + n / 2 - 1] + values[lo + n / 2]);
    };
    const std::size_t n = values.size();
    Quartiles q;
    q.min = values.front();
    q.max = values.back();
    q.median = median_of(0, n);
    q.q1 = median_of(0, n / 2 + n % 2);
    q.q3 = median_of(n / 2, n);
    return q;
}

}  // namespace fedsim
