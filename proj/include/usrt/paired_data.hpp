#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdlib>
#include <istream>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "usrt/error.hpp"
#include "usrt/score.hpp"

namespace usrt {

// Treated-minus-control differences, one per matched pair.
class PairDifferences {
public:
    PairDifferences() = default;
    explicit PairDifferences(std::vector<double> y) : y_(std::move(y)) {
        for (std::size_t i = 0; i < y_.size(); ++i) {
            if (!std::isfinite(y_[i])) {
                throw InputError("pair difference " + std::to_string(i) + " is not finite");
            }
        }
    }

    std::size_t size() const { return y_.size(); }
    bool empty() const { return y_.empty(); }
    std::span<const double> values() const { return y_; }
    double operator[](std::size_t i) const { return y_[i]; }

private:
    std::vector<double> y_;
};

struct RankOptions {
    bool drop_zeros = false;
    // Absolute values within this distance of the first member of a run are
    // treated as tied. Zero means exact equality.
    double tie_tolerance = 0.0;
};

struct TieGroup {
    std::size_t first = 0; // 0-based rank of the smallest member
    std::size_t last = 0;  // inclusive
    std::size_t size() const { return last - first + 1; }
};

// Pairs ordered by |Y| (ascending). Ranks are 0-based here; rank r corresponds
// to index i = r + 1 in the usual 1..n notation.
struct RankedSample {
    std::vector<double> abs_sorted;
    std::vector<std::uint8_t> signs;          // 1{Y_(i) > 0}
    std::vector<std::size_t> original_index;  // position in the input
    std::vector<std::size_t> group_of;        // tie group index of each rank
    std::vector<TieGroup> groups;             // in rank order
    std::size_t zero_count = 0;               // zeros present in the ranked sample
    std::size_t dropped_zeros = 0;

    std::size_t n() const { return abs_sorted.size(); }
    bool has_ties() const { return groups.size() < abs_sorted.size(); }

    // m(i) as a 0-based rank: the lowest rank tied with rank r.
    std::size_t group_min(std::size_t r) const { return groups[group_of[r]].first; }

    std::size_t tied_pairs() const {
        std::size_t c = 0;
        for (const auto& g : groups) c += g.size() > 1 ? g.size() : 0;
        return c;
    }
    std::size_t tie_group_count() const {
        std::size_t c = 0;
        for (const auto& g : groups) c += g.size() > 1 ? 1 : 0;
        return c;
    }
    std::size_t positives() const {
        return static_cast<std::size_t>(std::count(signs.begin(), signs.end(), std::uint8_t{1}));
    }
};

inline RankedSample rank_by_abs(const PairDifferences& data, const RankOptions& opt = {}) {
    if (!(opt.tie_tolerance >= 0.0)) throw ConfigError("tie tolerance must be nonnegative");
    RankedSample out;
    std::vector<std::size_t> idx;
    idx.reserve(data.size());
    for (std::size_t i = 0; i < data.size(); ++i) {
        if (opt.drop_zeros && data[i] == 0.0) {
            ++out.dropped_zeros;
            continue;
        }
        idx.push_back(i);
    }
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
        return std::fabs(data[a]) < std::fabs(data[b]);
    });

    const std::size_t n = idx.size();
    out.abs_sorted.resize(n);
    out.signs.resize(n);
    out.original_index = idx;
    out.group_of.resize(n);
    for (std::size_t r = 0; r < n; ++r) {
        const double y = data[idx[r]];
        out.abs_sorted[r] = std::fabs(y);
        out.signs[r] = y > 0.0 ? 1 : 0;
        out.zero_count += y == 0.0 ? 1 : 0;
    }
    for (std::size_t r = 0; r < n; ++r) {
        const bool joins = !out.groups.empty() &&
                           out.abs_sorted[r] - out.abs_sorted[out.groups.back().first] <=
                               opt.tie_tolerance;
        if (joins) {
            out.groups.back().last = r;
        } else {
            out.groups.push_back({r, r});
        }
        out.group_of[r] = out.groups.size() - 1;
    }
    return out;
}

// c_i = phi(i / (n + 1)), i = 1..n.
inline std::vector<double> rank_scores(std::size_t n, const ScoreFunction& score) {
    std::vector<double> c(n);
    const double denom = static_cast<double>(n) + 1.0;
    for (std::size_t r = 0; r < n; ++r) {
        const double i = static_cast<double>(r + 1);
        c[r] = score.evaluate(i / denom);
    }
    return c;
}

struct TieScores {
    std::vector<double> c_star;
};

// c*_i = |J_i|^{-1} sum_{j in J_i} phi(j / (n + 1)).
inline TieScores tie_averaged_scores(const RankedSample& ranked, const ScoreFunction& score) {
    const std::vector<double> c = rank_scores(ranked.n(), score);
    TieScores out{std::vector<double>(ranked.n())};
    for (const auto& g : ranked.groups) {
        double s = 0.0;
        for (std::size_t r = g.first; r <= g.last; ++r) s += c[r];
        const double avg = g.size() == 1 ? c[g.first] : s / static_cast<double>(g.size());
        for (std::size_t r = g.first; r <= g.last; ++r) out.c_star[r] = avg;
    }
    return out;
}

namespace detail {

inline std::string trim(std::string s) {
    const auto not_space = [](unsigned char ch) { return !std::isspace(ch); };
    s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
    s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
    if (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = s.substr(1, s.size() - 2);
    return s;
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        out.push_back(trim(line.substr(start, comma - start)));
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    return out;
}

inline double parse_number(const std::string& field, std::size_t line_no, const std::string& col) {
    if (field.empty()) {
        throw InputError("line " + std::to_string(line_no) + ": empty value in column '" + col + "'");
    }
    char* end = nullptr;
    const double v = std::strtod(field.c_str(), &end);
    if (end != field.c_str() + field.size()) {
        throw InputError("line " + std::to_string(line_no) + ": cannot parse '" + field +
                         "' in column '" + col + "'");
    }
    if (!std::isfinite(v)) {
        throw InputError("line " + std::to_string(line_no) + ": non-finite value in column '" +
                         col + "'");
    }
    return v;
}

} // namespace detail

// Reads pair differences from CSV with a header row containing either a `y`
// column or both `treated` and `control` columns (y = treated - control).
inline PairDifferences read_pairs_csv(std::istream& in) {
    std::string line;
    std::size_t line_no = 0;
    std::vector<std::string> header;
    while (std::getline(in, line)) {
        ++line_no;
        if (line_no == 1 && line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (detail::trim(line).empty()) continue;
        header = detail::split_csv_line(line);
        break;
    }
    if (header.empty()) throw InputError("CSV input is empty (a header row is required)");

    auto find = [&](const std::string& name) -> std::ptrdiff_t {
        const auto it = std::find(header.begin(), header.end(), name);
        return it == header.end() ? -1 : it - header.begin();
    };
    const std::ptrdiff_t y_col = find("y");
    const std::ptrdiff_t t_col = find("treated");
    const std::ptrdiff_t c_col = find("control");
    if (y_col < 0) {
        if (t_col < 0 && c_col < 0) {
            throw InputError("missing column 'y' (or columns 'treated' and 'control')");
        }
        if (t_col < 0) throw InputError("missing column 'treated'");
        if (c_col < 0) throw InputError("missing column 'control'");
    }

    std::vector<double> y;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (detail::trim(line).empty()) continue;
        const auto fields = detail::split_csv_line(line);
        if (fields.size() != header.size()) {
            throw InputError("line " + std::to_string(line_no) + ": expected " +
                             std::to_string(header.size()) + " fields, found " +
                             std::to_string(fields.size()));
        }
        if (y_col >= 0) {
            y.push_back(detail::parse_number(fields[y_col], line_no, "y"));
        } else {
            const double t = detail::parse_number(fields[t_col], line_no, "treated");
            const double c = detail::parse_number(fields[c_col], line_no, "control");
            y.push_back(t - c);
        }
    }
    if (y.empty()) throw InputError("CSV input has a header but no data rows");
    return PairDifferences(std::move(y));
}

} // namespace usrt
