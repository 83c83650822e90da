#pragma once

#include "crn/errors.hpp"
#include "crn/field.hpp"
#include "crn/rational.hpp"

#include <cmath>
#include <cstddef>
#include <charconv>
#include <numeric>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace crn {

struct Reaction {
    Complex source;
    Complex target;
    double kappa = 1.0;
};

/// Planar Euclidean embedded graph with mass-action rate constants.
///
/// Construction validates the network: no self-loops, positive rates, at
/// least two complexes, and reaction vectors spanning the plane (checked with
/// exact cross products). Complexes are deduplicated in order of first
/// appearance. Immutable afterwards.
class ReactionNetwork {
public:
    explicit ReactionNetwork(std::vector<Reaction> reactions) : reactions_(std::move(reactions)) {
        if (reactions_.empty()) throw InvalidNetwork("network has no reactions");
        for (std::size_t i = 0; i < reactions_.size(); ++i) {
            const auto& r = reactions_[i];
            if (r.source == r.target)
                throw InvalidNetwork("reaction " + std::to_string(i + 1) + " is a self-loop");
            if (!(r.kappa > 0.0) || !std::isfinite(r.kappa))
                throw InvalidNetwork("reaction " + std::to_string(i + 1) +
                                     " has a non-positive rate constant");
            source_idx_.push_back(intern(r.source));
            target_idx_.push_back(intern(r.target));
        }
        if (!spans_plane())
            throw InvalidNetwork("reaction vectors do not span the plane");
    }

    const std::vector<Complex>& complexes() const noexcept { return complexes_; }
    const std::vector<Reaction>& reactions() const noexcept { return reactions_; }
    std::size_t source_index(std::size_t reaction) const { return source_idx_.at(reaction); }
    std::size_t target_index(std::size_t reaction) const { return target_idx_.at(reaction); }

    std::vector<double> rates() const {
        std::vector<double> k;
        for (const auto& r : reactions_) k.push_back(r.kappa);
        return k;
    }

    /// Same graph with the leading rate constants replaced positionally.
    ReactionNetwork with_rates(std::span<const double> kappa) const {
        if (kappa.size() > reactions_.size())
            throw PreconditionError("more rate constants than reactions");
        auto rs = reactions_;
        for (std::size_t i = 0; i < kappa.size(); ++i) rs[i].kappa = kappa[i];
        return ReactionNetwork(std::move(rs));
    }

private:
    std::size_t intern(const Complex& c) {
        for (std::size_t i = 0; i < complexes_.size(); ++i)
            if (complexes_[i] == c) return i;
        complexes_.push_back(c);
        return complexes_.size() - 1;
    }

    bool spans_plane() const {
        for (std::size_t i = 0; i < reactions_.size(); ++i) {
            for (std::size_t j = i + 1; j < reactions_.size(); ++j) {
                const auto& r = reactions_[i];
                const auto& s = reactions_[j];
                Rational cross = (r.target.a - r.source.a) * (s.target.b - s.source.b) -
                                 (r.target.b - r.source.b) * (s.target.a - s.source.a);
                if (cross != Rational(0)) return true;
            }
        }
        return false;
    }

    std::vector<Reaction> reactions_;
    std::vector<Complex> complexes_;
    std::vector<std::size_t> source_idx_;
    std::vector<std::size_t> target_idx_;
};

namespace detail {

inline std::vector<std::string_view> split_ws(std::string_view s) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < s.size()) {
        while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
        std::size_t j = i;
        while (j < s.size() && !std::isspace(static_cast<unsigned char>(s[j]))) ++j;
        if (j > i) out.push_back(s.substr(i, j - i));
        i = j;
    }
    return out;
}

// Rates are real: fractions n/d or any finite decimal, including exponent notation.
inline std::optional<double> parse_rate(std::string_view s) {
    if (s.find('/') != std::string_view::npos) {
        auto r = parse_rational(s);
        return r ? std::optional<double>(to_double(*r)) : std::nullopt;
    }
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
    return v;
}

}  // namespace detail

/// Parses the line-oriented network format
///
///     <a> <b> -> <a'> <b'> @ <kappa>     # comment
///
/// Coordinates are integers, decimals or fractions n/d and are kept exact.
inline ReactionNetwork parse_network(std::string_view text) {
    std::vector<Reaction> reactions;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t end = text.find('\n', pos);
        if (end == std::string_view::npos) end = text.size();
        std::string_view line = text.substr(pos, end - pos);
        pos = end + 1;
        ++line_no;
        if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        auto tok = detail::split_ws(line);
        if (tok.empty()) {
            if (end == text.size()) break;
            continue;
        }
        if (tok.size() != 7 || tok[2] != "->" || tok[5] != "@")
            throw ParseError(line_no, "expected '<a> <b> -> <a'> <b'> @ <kappa>'");
        Complex c[2];
        const std::size_t coord_idx[4] = {0, 1, 3, 4};
        for (int k = 0; k < 4; ++k) {
            auto v = parse_rational(tok[coord_idx[k]]);
            if (!v)
                throw ParseError(line_no, "invalid coordinate '" + std::string(tok[coord_idx[k]]) + "'");
            (k % 2 == 0 ? c[k / 2].a : c[k / 2].b) = *v;
        }
        auto kappa = detail::parse_rate(tok[6]);
        if (!kappa) throw ParseError(line_no, "invalid rate constant '" + std::string(tok[6]) + "'");
        if (!(*kappa > 0.0)) throw ParseError(line_no, "rate constant must be positive");
        if (c[0] == c[1]) throw ParseError(line_no, "self-loop reaction");
        reactions.push_back({c[0], c[1], *kappa});
        if (end == text.size()) break;
    }
    if (reactions.empty()) throw ParseError(0, "no reactions found");
    return ReactionNetwork(std::move(reactions));
}

/// Serializes back into the network file format (rates with 17 significant digits).
inline std::string format_network(const ReactionNetwork& net) {
    std::ostringstream os;
    os.precision(17);
    for (const auto& r : net.reactions())
        os << to_string(r.source.a) << ' ' << to_string(r.source.b) << " -> "
           << to_string(r.target.a) << ' ' << to_string(r.target.b) << " @ " << r.kappa << '\n';
    return os.str();
}

namespace detail {

// Transitive closure of the reaction graph; reach[i][j] == i ->* j.
inline std::vector<std::vector<bool>> reachability(const ReactionNetwork& net, bool undirected) {
    const std::size_t m = net.complexes().size();
    std::vector<std::vector<bool>> reach(m, std::vector<bool>(m, false));
    for (std::size_t i = 0; i < m; ++i) reach[i][i] = true;
    for (std::size_t r = 0; r < net.reactions().size(); ++r) {
        auto s = net.source_index(r), t = net.target_index(r);
        reach[s][t] = true;
        if (undirected) reach[t][s] = true;
    }
    for (std::size_t k = 0; k < m; ++k)
        for (std::size_t i = 0; i < m; ++i)
            if (reach[i][k])
                for (std::size_t j = 0; j < m; ++j)
                    if (reach[k][j]) reach[i][j] = true;
    return reach;
}

}  // namespace detail

struct ReversibilityClass {
    bool weakly_reversible = false;
    int linkage_classes = 0;     ///< weakly connected components (ell)
    int terminal_classes = 0;    ///< absorbing strong components (t)
};

inline ReversibilityClass reversibility_class(const ReactionNetwork& net) {
    const std::size_t m = net.complexes().size();
    auto weak = detail::reachability(net, true);
    auto strong = detail::reachability(net, false);

    ReversibilityClass out;
    std::vector<bool> seen(m, false);
    for (std::size_t i = 0; i < m; ++i) {
        if (seen[i]) continue;
        ++out.linkage_classes;
        for (std::size_t j = 0; j < m; ++j)
            if (weak[i][j]) seen[j] = true;
    }

    out.weakly_reversible = true;
    for (std::size_t r = 0; r < net.reactions().size(); ++r)
        if (!strong[net.target_index(r)][net.source_index(r)]) out.weakly_reversible = false;

    // A strong component is absorbing when nothing outside it is reachable.
    std::fill(seen.begin(), seen.end(), false);
    for (std::size_t i = 0; i < m; ++i) {
        if (seen[i]) continue;
        bool absorbing = true;
        for (std::size_t j = 0; j < m; ++j) {
            bool same = strong[i][j] && strong[j][i];
            if (same) seen[j] = true;
            if (strong[i][j] && !same) absorbing = false;
        }
        if (absorbing) ++out.terminal_classes;
    }
    return out;
}

/// m - ell - 2 for a planar network.
inline int deficiency(const ReactionNetwork& net) {
    return static_cast<int>(net.complexes().size()) - reversibility_class(net).linkage_classes - 2;
}

/// Shifts every complex by (alpha, beta); the field gets multiplied by x^alpha y^beta.
inline ReactionNetwork translate(const ReactionNetwork& net, const Rational& alpha,
                                 const Rational& beta) {
    auto rs = net.reactions();
    for (auto& r : rs) {
        r.source.a += alpha;
        r.source.b += beta;
        r.target.a += alpha;
        r.target.b += beta;
    }
    return ReactionNetwork(std::move(rs));
}

/// Mass-action right-hand side: sum over reactions of kappa * (target - source) * x^a y^b.
inline VectorField vector_field(const ReactionNetwork& net) {
    std::vector<Monomial<Rational>> xs, ys;
    for (const auto& r : net.reactions()) {
        xs.push_back({to_double(r.target.a - r.source.a) * r.kappa, r.source.a, r.source.b});
        ys.push_back({to_double(r.target.b - r.source.b) * r.kappa, r.source.a, r.source.b});
    }
    return make_field(xs, ys);
}

}  // namespace crn
