#pragma once
/*
Subcommand implementations behind the usrt command-line tool.

Each command validates its configuration, runs, and writes a self-describing
report (JSON for test/gamma, CSV with "# key=value" header lines for
design/power) that embeds the effective configuration after defaults.
Failures produce one JSON error line on the error stream and an exit code:

  0 success, 2 input error, 3 configuration error, 4 numeric failure.
*/

#include <chrono>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "usrt/alternatives.hpp"
#include "usrt/design.hpp"
#include "usrt/error.hpp"
#include "usrt/format.hpp"
#include "usrt/paired_data.hpp"
#include "usrt/power.hpp"
#include "usrt/score.hpp"
#include "usrt/tester.hpp"

namespace usrt {

inline constexpr int kSchemaVersion = 1;

enum ExitCode : int { kExitOk = 0, kExitInput = 2, kExitConfig = 3, kExitNumeric = 4 };

struct RunConfig {
    std::string subcommand;
    std::string input;                  // CSV path, "-" for stdin
    std::string score = "sign";
    std::string dist = "normal:0.5,1";
    double gamma = 1.0;
    double alpha = 0.05;
    double x0 = 1.0 / 3.0;
    std::string kind = "uniform";
    std::string method;                 // empty: exact_sign for sign, normal_approx otherwise
    std::uint64_t seed = 0;
    std::size_t reps = 10000;
    std::size_t mc_reps = 100000;
    bool drop_zeros = false;
    double tie_tolerance = 0.0;
    // gamma search
    double gamma_max = 100.0;
    std::size_t gamma_points = 400;
    double gamma_tolerance = 0.01;
    // design curve
    double x_min = 1e-4;
    std::size_t x_points = 200;
    // power sweep
    std::vector<std::string> scores;
    std::vector<std::string> kinds;
    std::vector<std::size_t> n_values;
    std::vector<double> gamma_values;
    bool worst_case_null = false;
    std::string summary;                // optional JSON summary path (power)
};

using Json = nlohmann::ordered_json;

namespace detail {

inline Json number_or_null(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

inline PairDifferences load_pairs(const std::string& path) {
    if (path.empty()) throw InputError("no input file given (use --input)");
    if (path == "-") return read_pairs_csv(std::cin);
    std::ifstream in(path);
    if (!in) throw InputError("cannot open input file '" + path + "'");
    return read_pairs_csv(in);
}

inline TestOptions test_options(const RunConfig& cfg, const ScoreFunction& score) {
    TestOptions opt;
    opt.gamma = cfg.gamma;
    opt.alpha = cfg.alpha;
    opt.x0 = cfg.x0;
    opt.kind = parse_test_kind(cfg.kind);
    opt.method = cfg.method.empty() ? default_method(score) : parse_critical_method(cfg.method);
    opt.mc_reps = cfg.mc_reps;
    opt.mc_seed = cfg.seed;
    opt.rank.drop_zeros = cfg.drop_zeros;
    opt.rank.tie_tolerance = cfg.tie_tolerance;
    NullModel::from_gamma(opt.gamma);
    check_alpha(opt.alpha);
    if (!(opt.x0 > 0.0 && opt.x0 <= 1.0)) throw ConfigError("x0 must lie in (0,1]");
    if (!(opt.rank.tie_tolerance >= 0.0)) throw ConfigError("tie tolerance must be nonnegative");
    if (opt.kind == TestKind::Fixed && *opt.method == CriticalMethod::ExactSign &&
        score.kind() != ScoreKind::Sign) {
        throw ConfigError("exact_sign critical values require the sign score");
    }
    if (*opt.method == CriticalMethod::MonteCarlo && opt.mc_reps == 0) {
        throw ConfigError("mc-reps must be >= 1");
    }
    return opt;
}

inline Json test_config_json(const RunConfig& cfg, const ScoreFunction& score, const TestOptions& opt) {
    Json j;
    j["input"] = cfg.input;
    j["score"] = score.name();
    j["kind"] = std::string(to_string(opt.kind));
    j["gamma"] = opt.gamma;
    j["alpha"] = opt.alpha;
    j["x0"] = opt.x0;
    j["method"] = opt.kind == TestKind::Fixed ? Json(std::string(to_string(*opt.method))) : Json(nullptr);
    j["mc_reps"] = opt.mc_reps;
    j["seed"] = cfg.seed;
    j["drop_zeros"] = opt.rank.drop_zeros;
    j["tie_tolerance"] = opt.rank.tie_tolerance;
    return j;
}

inline Json input_digest(const PairDifferences& data, const RankedSample& ranked) {
    Json j;
    j["n_pairs"] = data.size();
    j["n_used"] = ranked.n();
    j["zero_count"] = ranked.zero_count;
    j["dropped_zeros"] = ranked.dropped_zeros;
    j["tie_groups"] = ranked.tie_group_count();
    j["tied_pairs"] = ranked.tied_pairs();
    j["positives"] = ranked.positives();
    return j;
}

inline Json result_json(const TestResult& r) {
    Json j;
    j["reject"] = r.reject;
    j["crossing_ranks"] = r.crossing_ranks;
    j["max_margin"] = number_or_null(r.max_margin);
    j["best_rank"] = r.best_rank;
    j["statistic"] = r.statistic;
    j["threshold_at_best"] = number_or_null(r.threshold_at_best);
    if (r.kind == TestKind::Uniform) {
        j["lambda"] = number_or_null(r.lambda);
        j["k0"] = r.k0;
    }
    j["starred"] = r.starred;
    j["degenerate"] = r.degenerate;
    j["n"] = r.n;
    return j;
}

inline void write_text(const std::string& path, const std::string& text, std::ostream& out) {
    if (path.empty() || path == "-") {
        out << text;
        return;
    }
    std::ofstream f(path);
    if (!f) throw InputError("cannot open output file '" + path + "'");
    f << text;
}

template <class T>
std::string join(const std::vector<T>& values) {
    std::ostringstream os;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i) os << ";";
        if constexpr (std::is_floating_point_v<T>) {
            os << format_number(values[i]);
        } else {
            os << values[i];
        }
    }
    return os.str();
}

} // namespace detail

inline std::string cmd_test(const RunConfig& cfg) {
    const ScoreFunction score = ScoreFunction::parse(cfg.score);
    const TestOptions opt = detail::test_options(cfg, score);
    const PairDifferences data = detail::load_pairs(cfg.input);
    const PreparedSample prepared(data, score, opt.rank);
    const TestResult res = prepared.run(opt);

    Json j;
    j["schema_version"] = kSchemaVersion;
    j["command"] = "test";
    j["config"] = detail::test_config_json(cfg, score, opt);
    j["input_digest"] = detail::input_digest(data, prepared.ranked());
    j["result"] = detail::result_json(res);
    return j.dump(2) + "\n";
}

inline std::string cmd_gamma(const RunConfig& cfg) {
    const ScoreFunction score = ScoreFunction::parse(cfg.score);
    RunConfig at_one = cfg;
    at_one.gamma = 1.0;
    const TestOptions opt = detail::test_options(at_one, score);
    const GammaGrid grid{cfg.gamma_max, cfg.gamma_points, cfg.gamma_tolerance};
    if (!(grid.gamma_max > 1.0) || grid.points < 2 || !(grid.tolerance > 0.0)) {
        throw ConfigError("gamma grid needs gamma-max > 1, gamma-points >= 2, gamma-tol > 0");
    }
    const PairDifferences data = detail::load_pairs(cfg.input);
    const GammaThreshold th = gamma_threshold(data, score, opt, grid);
    const PreparedSample prepared(data, score, opt.rank);

    Json config = detail::test_config_json(cfg, score, opt);
    config.erase("gamma");
    config["gamma_max"] = grid.gamma_max;
    config["gamma_points"] = grid.points;
    config["gamma_tolerance"] = grid.tolerance;

    Json r;
    r["status"] = !th.rejects_at_one ? "no_rejection_at_gamma_1"
                  : th.capped        ? "capped_at_gamma_max"
                                     : "ok";
    r["gamma_hat"] = th.gamma_hat;
    r["rejects_at_one"] = th.rejects_at_one;
    r["capped"] = th.capped;
    r["monotone_ok"] = th.monotone_ok;
    r["bracket_lo"] = th.bracket_lo;
    r["bracket_hi"] = detail::number_or_null(th.bracket_hi);
    r["refinements"] = th.refinements;
    r["starred"] = prepared.starred();
    r["grid"] = th.grid;
    r["decisions"] = th.decisions;

    Json j;
    j["schema_version"] = kSchemaVersion;
    j["command"] = "gamma";
    j["config"] = config;
    j["input_digest"] = detail::input_digest(data, prepared.ranked());
    j["result"] = r;
    return j.dump(2) + "\n";
}

inline std::string cmd_design(const RunConfig& cfg) {
    const ScoreFunction score = ScoreFunction::parse(cfg.score);
    const AlternativeDist dist = AlternativeDist::parse(cfg.dist);
    const XGrid grid{cfg.x_min, 1.0, cfg.x_points};
    grid.values();
    const UniformDesign u = gamma_tilde_uniform(score, dist, grid);
    const double pi1 = pi_fixed(score, dist);

    std::vector<std::string> meta{
        "schema_version=" + std::to_string(kSchemaVersion),
        "command=design",
        "score=" + score.name(),
        "dist=" + dist.name(),
        "x_min=" + format_number(grid.x_min),
        "x_max=" + format_number(grid.x_max),
        "x_points=" + std::to_string(grid.points),
        "pi_fixed=" + format_number(pi1),
        "gamma_fixed=" + format_number(gamma_of_pi(pi1)),
        "gamma_tilde_uniform=" + format_number(u.gamma_tilde),
        "grid_sup=" + format_number(u.grid_sup),
        "argmax_x=" + format_number(u.argmax_x),
        "tail_ratio_liminf=" + format_number(u.tail.value),
        std::string("tail_diverges=") + (u.tail.diverges ? "true" : "false"),
    };
    std::ostringstream os;
    write_curve_csv(os, u.curve, meta);
    return os.str();
}

inline std::string cmd_power(const RunConfig& cfg, std::string* summary_json = nullptr) {
    const auto start = std::chrono::steady_clock::now();
    PowerSpec base;
    base.dist = AlternativeDist::parse(cfg.dist);
    base.alpha = cfg.alpha;
    base.x0 = cfg.x0;
    base.reps = cfg.reps;
    base.seed = cfg.seed;
    base.worst_case_null = cfg.worst_case_null;
    if (!cfg.method.empty()) base.method = parse_critical_method(cfg.method);
    if (cfg.reps < 1) throw ConfigError("reps must be >= 1");

    std::vector<ScoreFunction> scores;
    for (const auto& s : cfg.scores.empty() ? std::vector<std::string>{cfg.score} : cfg.scores) {
        scores.push_back(ScoreFunction::parse(s));
    }
    std::vector<TestKind> kinds;
    for (const auto& k : cfg.kinds.empty() ? std::vector<std::string>{cfg.kind} : cfg.kinds) {
        kinds.push_back(parse_test_kind(k));
    }
    const std::vector<std::size_t> ns = cfg.n_values.empty() ? std::vector<std::size_t>{100} : cfg.n_values;
    const std::vector<double> gammas =
        cfg.gamma_values.empty() ? std::vector<double>{cfg.gamma} : cfg.gamma_values;
    if (base.method && *base.method == CriticalMethod::ExactSign) {
        for (const auto& s : scores) {
            if (s.kind() != ScoreKind::Sign) throw ConfigError("exact_sign critical values require the sign score");
        }
    }

    const std::vector<PowerEstimate> rows = power_sweep(base, ns, gammas, kinds, scores);

    std::vector<std::string> score_names;
    for (const auto& s : scores) score_names.push_back(s.name());
    std::vector<std::string> kind_names;
    for (TestKind k : kinds) kind_names.emplace_back(to_string(k));
    std::vector<std::string> meta{
        "schema_version=" + std::to_string(kSchemaVersion),
        "command=power",
        "dist=" + base.dist_label(),
        "alpha=" + format_number(base.alpha),
        "x0=" + format_number(base.x0),
        "reps=" + std::to_string(base.reps),
        "seed=" + std::to_string(base.seed),
        "method=" + (base.method ? std::string(to_string(*base.method)) : std::string("default")),
        "scores=" + detail::join(score_names),
        "tests=" + detail::join(kind_names),
        "n=" + detail::join(ns),
        "gamma=" + detail::join(gammas),
    };
    std::ostringstream os;
    write_power_csv(os, rows, meta);

    if (summary_json) {
        const double seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        Json j;
        j["schema_version"] = kSchemaVersion;
        j["command"] = "power";
        Json spec;
        spec["dist"] = base.dist_label();
        spec["alpha"] = base.alpha;
        spec["x0"] = base.x0;
        spec["reps"] = base.reps;
        spec["seed"] = base.seed;
        spec["method"] = base.method ? Json(std::string(to_string(*base.method))) : Json(nullptr);
        spec["scores"] = score_names;
        spec["tests"] = kind_names;
        spec["n"] = ns;
        spec["gamma"] = gammas;
        j["config"] = spec;
        Json cells = Json::array();
        for (const auto& r : rows) {
            cells.push_back({{"score", r.spec.score.name()},
                             {"test", std::string(to_string(r.spec.kind))},
                             {"n", r.spec.n},
                             {"gamma", r.spec.gamma},
                             {"power", r.power},
                             {"mc_se", r.mc_se},
                             {"rejections", r.rejections}});
        }
        j["cells"] = cells;
        j["wall_clock_seconds"] = seconds;
        j["threads"] = default_thread_count();
        *summary_json = j.dump(2) + "\n";
    }
    return os.str();
}

inline void write_error(std::ostream& err, int code, const char* kind, const std::string& message) {
    Json j;
    j["error"] = {{"code", code}, {"kind", kind}, {"message", message}};
    err << j.dump() << "\n";
}

// Runs a subcommand, writing the report to `output` (or `out` when empty or "-").
inline int run_command(const RunConfig& cfg, const std::string& output, std::ostream& out,
                       std::ostream& err) {
    try {
        std::string text;
        std::string summary;
        if (cfg.subcommand == "test") {
            text = cmd_test(cfg);
        } else if (cfg.subcommand == "gamma") {
            text = cmd_gamma(cfg);
        } else if (cfg.subcommand == "design") {
            text = cmd_design(cfg);
        } else if (cfg.subcommand == "power") {
            text = cmd_power(cfg, cfg.summary.empty() ? nullptr : &summary);
        } else {
            throw ConfigError("unknown subcommand '" + cfg.subcommand + "'");
        }
        detail::write_text(output, text, out);
        if (!cfg.summary.empty()) detail::write_text(cfg.summary, summary, out);
        return kExitOk;
    } catch (const InputError& e) {
        write_error(err, kExitInput, "input", e.what());
        return kExitInput;
    } catch (const ConfigError& e) {
        write_error(err, kExitConfig, "config", e.what());
        return kExitConfig;
    } catch (const DomainError& e) {
        write_error(err, kExitConfig, "config", e.what());
        return kExitConfig;
    } catch (const NumericError& e) {
        write_error(err, kExitNumeric, "numeric", e.what());
        return kExitNumeric;
    } catch (const std::exception& e) {
        write_error(err, kExitNumeric, "numeric", e.what());
        return kExitNumeric;
    }
}

} // namespace usrt
