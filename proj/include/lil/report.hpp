// report.hpp
//
// JSON and CSV serialization of crossing reports. JSON numbers are written
// in shortest round-trip form, so parse(write(r)) reproduces every double
// bit for bit. Files are written to a temporary sibling and renamed into
// place, so a failed write never leaves a partial report.
#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>
#include <string>

#include "json.hpp"
#include "lil/simulation.hpp"

namespace lil {

inline constexpr const char* kSchemaVersion = "1";

enum class ReportFormat { json, csv };

inline ReportFormat report_format_from_string(std::string_view s) {
    if (s == "json") return ReportFormat::json;
    if (s == "csv") return ReportFormat::csv;
    throw std::invalid_argument("unknown report format: " + std::string(s));
}

inline nlohmann::ordered_json model_to_json(const IncrementModel& m) {
    nlohmann::ordered_json j;
    j["kind"] = std::string(to_string(m.kind));
    if (m.kind == ModelKind::bounded_schedule) j["schedule"] = m.schedule;
    if (m.kind == ModelKind::bounded_e2 || m.kind == ModelKind::moment_family) j["scale"] = m.scale;
    return j;
}

inline IncrementModel model_from_json(const nlohmann::json& j) {
    IncrementModel m;
    m.kind = model_kind_from_string(j.value("kind", std::string("rademacher")));
    if (j.contains("schedule")) m.schedule = j.at("schedule").get<std::vector<double>>();
    if (j.contains("scale")) m.scale = j.at("scale").get<double>();
    else if (m.kind == ModelKind::bounded_e2) m.scale = kE2;
    m.validate();
    return m;
}

// The experiment block. It doubles as the CLI config-file schema.
inline nlohmann::ordered_json experiment_to_json(const CrossingExperiment& e) {
    nlohmann::ordered_json j;
    j["family"] = std::string(to_string(e.boundary.family));
    j["delta"] = e.boundary.delta;
    j["k"] = e.boundary.k;
    j["v"] = e.boundary.v;
    j["c1"] = e.boundary.c1;
    j["c2"] = e.boundary.c2;
    j["hoeffding_c173"] = e.boundary.hoeffding_c173;
    j["c173"] = e.boundary.c173;
    j["horizon_T"] = e.horizon_T;
    j["n_paths"] = e.n_paths;
    j["master_seed"] = e.master_seed;
    j["direction"] = std::string(to_string(e.direction));
    j["flavor"] = std::string(to_string(e.flavor));
    j["upper_rule"] = std::string(to_string(e.upper_rule));
    j["model"] = model_to_json(e.model);
    j["step_budget"] = e.step_budget;
    return j;
}

// Fields absent from `j` keep the values already in `base`.
inline CrossingExperiment experiment_from_json(const nlohmann::json& j, CrossingExperiment base = {}) {
    auto& b = base.boundary;
    if (j.contains("family")) b.family = family_from_string(j.at("family").get<std::string>());
    if (j.contains("delta")) b.delta = j.at("delta").get<double>();
    if (j.contains("k")) b.k = j.at("k").get<double>();
    if (j.contains("v")) b.v = j.at("v").get<int>();
    if (j.contains("c1")) b.c1 = j.at("c1").get<double>();
    if (j.contains("c2")) b.c2 = j.at("c2").get<double>();
    if (j.contains("hoeffding_c173")) b.hoeffding_c173 = j.at("hoeffding_c173").get<bool>();
    if (j.contains("c173")) b.c173 = j.at("c173").get<double>();
    if (j.contains("horizon_T")) base.horizon_T = j.at("horizon_T").get<std::int64_t>();
    if (j.contains("n_paths")) base.n_paths = j.at("n_paths").get<std::int64_t>();
    if (j.contains("master_seed")) base.master_seed = j.at("master_seed").get<std::uint64_t>();
    if (j.contains("direction")) base.direction = direction_from_string(j.at("direction").get<std::string>());
    if (j.contains("flavor")) base.flavor = flavor_from_string(j.at("flavor").get<std::string>());
    if (j.contains("upper_rule")) base.upper_rule = upper_rule_from_string(j.at("upper_rule").get<std::string>());
    if (j.contains("model")) base.model = model_from_json(j.at("model"));
    if (j.contains("step_budget")) base.step_budget = j.at("step_budget").get<double>();
    return base;
}

inline nlohmann::ordered_json to_json(const CrossingReport& r) {
    nlohmann::ordered_json j;
    j["schema_version"] = kSchemaVersion;
    j["experiment"] = experiment_to_json(r.experiment);
    auto& res = j["results"];
    res["n_paths"] = r.n_paths;
    res["n_crossed"] = r.n_crossed;
    res["crossing_fraction"] = r.crossing_fraction;
    res["wilson_ci"] = {r.wilson_lo, r.wilson_hi};
    res["truncated"] = r.truncated;
    res["first_crossing_histogram"] = nlohmann::ordered_json::array();
    for (const auto& b : r.first_crossing_histogram)
        res["first_crossing_histogram"].push_back({{"t_bucket", b.t_bucket}, {"count", b.count}});
    auto& d = j["diagnostics"];
    d["start_threshold"] = r.start_threshold;
    d["fired"] = {{"linear", r.fired_linear},
                  {"iterated_log", r.fired_iterated_log},
                  {"initial_segment", r.fired_initial_segment}};
    if (r.lower_stats) {
        const auto& s = *r.lower_stats;
        d["lower_lemmas"] = {{"ratio_checked", s.ratio_checked},
                             {"ratio_skipped", s.ratio_skipped},
                             {"ratio_violations", s.ratio_violations},
                             {"max_ratio", s.max_ratio},
                             {"endpoint_qualifying", s.endpoint_qualifying},
                             {"endpoint_violations", s.endpoint_violations},
                             {"max_endpoint_lhs", s.max_endpoint_lhs}};
    }
    return j;
}

inline CrossingReport report_from_json(const nlohmann::json& j) {
    if (j.value("schema_version", std::string()) != kSchemaVersion)
        throw std::invalid_argument("report: unsupported schema_version");
    CrossingReport r;
    r.experiment = experiment_from_json(j.at("experiment"));
    const auto& res = j.at("results");
    r.n_paths = res.at("n_paths").get<std::int64_t>();
    r.n_crossed = res.at("n_crossed").get<std::int64_t>();
    r.crossing_fraction = res.at("crossing_fraction").get<double>();
    r.wilson_lo = res.at("wilson_ci").at(0).get<double>();
    r.wilson_hi = res.at("wilson_ci").at(1).get<double>();
    r.truncated = res.at("truncated").get<bool>();
    for (const auto& b : res.at("first_crossing_histogram"))
        r.first_crossing_histogram.push_back({b.at("t_bucket").get<std::int64_t>(), b.at("count").get<std::int64_t>()});
    if (j.contains("diagnostics")) {
        const auto& d = j.at("diagnostics");
        r.start_threshold = d.value("start_threshold", 0.0);
        if (d.contains("fired")) {
            r.fired_linear = d.at("fired").value("linear", std::int64_t{0});
            r.fired_iterated_log = d.at("fired").value("iterated_log", std::int64_t{0});
            r.fired_initial_segment = d.at("fired").value("initial_segment", std::int64_t{0});
        }
        if (d.contains("lower_lemmas")) {
            const auto& l = d.at("lower_lemmas");
            LowerLemmaStats s;
            s.ratio_checked = l.at("ratio_checked").get<std::int64_t>();
            s.ratio_skipped = l.at("ratio_skipped").get<std::int64_t>();
            s.ratio_violations = l.at("ratio_violations").get<std::int64_t>();
            s.max_ratio = l.at("max_ratio").get<double>();
            s.endpoint_qualifying = l.at("endpoint_qualifying").get<std::int64_t>();
            s.endpoint_violations = l.at("endpoint_violations").get<std::int64_t>();
            s.max_endpoint_lhs = l.at("max_endpoint_lhs").get<double>();
            r.lower_stats = s;
        }
    }
    return r;
}

// Compact decimal with 17 significant digits for the CSV form.
inline std::string format_double(double x) {
    std::ostringstream os;
    os << std::setprecision(17) << x;
    return os.str();
}

inline std::string to_csv(const CrossingReport& r) {
    std::ostringstream os;
    os << "row,t_bucket,count,n_paths,n_crossed,crossing_fraction,wilson_lo,wilson_hi,truncated\n";
    for (const auto& b : r.first_crossing_histogram) os << "bucket," << b.t_bucket << ',' << b.count << ",,,,,,\n";
    os << "summary,,," << r.n_paths << ',' << r.n_crossed << ',' << format_double(r.crossing_fraction) << ','
       << format_double(r.wilson_lo) << ',' << format_double(r.wilson_hi) << ',' << (r.truncated ? "true" : "false")
       << '\n';
    return os.str();
}

inline std::string render_report(const CrossingReport& r, ReportFormat f) {
    return f == ReportFormat::json ? to_json(r).dump(2) + "\n" : to_csv(r);
}

/// Writes `contents` to `path` through a temporary sibling and a rename.
inline void write_file_atomically(const std::filesystem::path& path, const std::string& contents) {
    const auto tmp = std::filesystem::path(path.string() + ".tmp");
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
        out << contents;
        out.flush();
        if (!out) {
            std::error_code ec;
            std::filesystem::remove(tmp, ec);
            throw std::runtime_error("write failed for " + tmp.string());
        }
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp, ec);
        throw std::runtime_error("cannot move report into place at " + path.string() + ": " + ec.message());
    }
}

inline void write_report(const CrossingReport& r, const std::filesystem::path& path, ReportFormat f) {
    write_file_atomically(path, render_report(r, f));
}

}  // namespace lil
