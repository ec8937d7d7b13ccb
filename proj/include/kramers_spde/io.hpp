#pragma once

#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "kramers_spde/errors.hpp"
#include "kramers_spde/kramers.hpp"
#include "kramers_spde/simulate.hpp"
#include "kramers_spde/spectra.hpp"

namespace kspde {

inline constexpr std::string_view tool_version = "kramers-spde 1.0.0";

/// Shortest round-trip-stable decimal form used in every CSV cell ("inf", "nan" spelled out).
[[nodiscard]] inline std::string format_number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

/// Writes comma-separated rows with '\n' endings; optionally flushes after each row.
class CsvWriter {
public:
    CsvWriter(std::ostream& os, bool flush_rows = false) : os_(os), flush_(flush_rows) {}

    void comment(std::string_view text) { os_ << "# " << text << '\n'; }

    void header(const std::vector<std::string>& cols) { row(cols); }

    void row(const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) os_ << (i == 0 ? "" : ",") << cells[i];
        os_ << '\n';
        if (flush_) os_.flush();
    }

private:
    std::ostream& os_;
    bool flush_;
};

inline const std::vector<std::string> predict_columns = {
    "L", "eps", "regime", "lambda1", "mu1", "C4", "H0", "prefactor", "log10_expected_time", "remainder_scale"};
inline const std::vector<std::string> simulate_columns = {"replica", "seed", "tau", "censored", "steps"};
inline const std::vector<std::string> sweep_mc_columns = {"mc_mean", "mc_stderr", "censored"};

[[nodiscard]] inline std::vector<std::string> predict_row(double L, double eps, const KramersPrediction& p) {
    return {format_number(L),          format_number(eps),     std::string(to_string(p.regime)),
            format_number(p.lambda1),  p.mu1 ? format_number(*p.mu1) : "",
            format_number(p.C4),       format_number(p.H0),    format_number(p.prefactor),
            format_number(p.log10_expected_time), format_number(p.remainder_scale)};
}

[[nodiscard]] inline std::vector<std::string> simulate_row(int replica, const TransitionSample& s) {
    return {std::to_string(replica), std::to_string(s.seed_used), format_number(s.tau), s.censored ? "1" : "0",
            std::to_string(s.steps)};
}

/// JSON helper: non-finite numbers become strings so the document stays valid JSON.
[[nodiscard]] inline nlohmann::json json_number(double v) {
    if (std::isfinite(v)) return v;
    return format_number(v);
}

[[nodiscard]] inline nlohmann::json to_json(const KramersPrediction& p) {
    nlohmann::json j;
    j["regime"] = std::string(to_string(p.regime));
    j["H0"] = json_number(p.H0);
    j["prefactor"] = json_number(p.prefactor);
    j["expected_time"] = json_number(p.expected_time);
    j["log10_expected_time"] = json_number(p.log10_expected_time);
    j["remainder_scale"] = json_number(p.remainder_scale);
    j["C4"] = json_number(p.C4);
    j["lambda1"] = json_number(p.lambda1);
    j["mu1"] = p.mu1 ? json_number(*p.mu1) : nlohmann::json(nullptr);
    j["d_used"] = p.d_used ? nlohmann::json(*p.d_used) : nlohmann::json("inf");
    return j;
}

[[nodiscard]] inline nlohmann::json to_json(const TransitionStats& s) {
    return {{"n", s.n},
            {"n_hit", s.n_hit},
            {"mean", json_number(s.mean)},
            {"stderr", json_number(s.stderr_)},
            {"min", json_number(s.min)},
            {"max", json_number(s.max)},
            {"censored", s.censored},
            {"mean_is_lower_bound", s.mean_is_lower_bound},
            {"censored_mean", json_number(s.censored_mean)},
            {"eps", s.eps},
            {"d", s.d},
            {"dt", s.dt},
            {"seed", s.seed}};
}

[[nodiscard]] inline nlohmann::json to_json(const SpectrumReport& r) {
    nlohmann::json ev = nlohmann::json::array();
    for (double v : r.eigenvalues) ev.push_back(json_number(v));
    return {{"bc", std::string(to_string(r.bc))},
            {"L", r.L},
            {"profile", r.profile},
            {"eigenvalues", ev},
            {"negative_count", r.negative_count},
            {"zero_modes", r.zero_modes},
            {"grid_n", r.grid_n},
            {"richardson_order", r.richardson_order}};
}

[[nodiscard]] inline std::string utc_timestamp() {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

/// Reproducibility record written next to every file output.
struct RunManifest {
    std::string subcommand;
    nlohmann::json config = nlohmann::json::object();
    std::string version = std::string(tool_version);
    std::string timestamp = utc_timestamp();
    std::optional<std::uint64_t> seed;
    std::vector<std::string> outputs;

    [[nodiscard]] nlohmann::json to_json() const {
        nlohmann::json j;
        j["subcommand"] = subcommand;
        j["config"] = config;
        j["version"] = version;
        j["timestamp"] = timestamp;
        j["seed"] = seed ? nlohmann::json(*seed) : nlohmann::json(nullptr);
        j["outputs"] = outputs;
        return j;
    }

    static RunManifest from_json(const nlohmann::json& j) {
        RunManifest m;
        m.subcommand = j.at("subcommand").get<std::string>();
        m.config = j.value("config", nlohmann::json::object());
        m.version = j.value("version", std::string(tool_version));
        m.timestamp = j.value("timestamp", std::string());
        if (j.contains("seed") && !j["seed"].is_null()) m.seed = j["seed"].get<std::uint64_t>();
        m.outputs = j.value("outputs", std::vector<std::string>{});
        return m;
    }

    void write(const std::string& path) const {
        std::ofstream os(path);
        if (!os) fail(ErrorCode::InvalidConfig, "cannot write manifest " + path);
        os << to_json().dump(2) << '\n';
    }
};

[[nodiscard]] inline std::string manifest_path_for(const std::string& output) { return output + ".manifest.json"; }

}  // namespace kspde
