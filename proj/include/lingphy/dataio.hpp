#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>
#include <type_traits>
#include <vector>

#include "lingphy/common.hpp"

namespace lingphy {

namespace detail {

// Logical line of a data file: content plus its physical 1-based line number.
struct DataLine {
    std::string text;
    int number;
};

// Reads non-blank, non-comment ('#') lines.
inline std::vector<DataLine> read_data_lines(std::istream& in) {
    std::vector<DataLine> out;
    std::string line;
    int number = 0;
    while (std::getline(in, line)) {
        ++number;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        std::size_t first = line.find_first_not_of(" \t");
        if (first == std::string::npos || line[first] == '#') continue;
        out.push_back({line, number});
    }
    return out;
}

[[noreturn]] inline void line_error(int line, const std::string& msg) {
    throw ParseError("line " + std::to_string(line) + ": " + msg);
}

inline std::vector<std::string> split_ws(const std::string& s) {
    std::vector<std::string> out;
    std::istringstream iss(s);
    std::string tok;
    while (iss >> tok) out.push_back(tok);
    return out;
}

template <typename T>
inline bool parse_number(const std::string& tok, T& out) {
    std::istringstream iss(tok);
    iss >> out;
    return static_cast<bool>(iss) && iss.peek() == EOF;
}

inline void check_taxa(const std::vector<std::string>& taxa) {
    for (const auto& t : taxa) require_valid_taxon_name(t);
    auto sorted = taxa;
    std::sort(sorted.begin(), sorted.end());
    auto dup = std::adjacent_find(sorted.begin(), sorted.end());
    if (dup != sorted.end())
        throw ParseError("duplicate taxon: " + *dup);
}

// Shared reader for the lower-triangular matrix format:
// line 1 = n, lines 2..n+1 = taxon name followed by i-1 values.
template <typename T>
inline std::pair<std::vector<std::string>, std::vector<std::vector<T>>>
read_lower_triangle(std::istream& in) {
    auto lines = read_data_lines(in);
    if (lines.empty()) throw ParseError("empty matrix file");
    int n = 0;
    if (!parse_number(lines[0].text, n) || n < 2)
        line_error(lines[0].number, "expected taxon count (an integer >= 2), got \"" +
                                        lines[0].text + "\"");
    if (static_cast<int>(lines.size()) != n + 1)
        throw ParseError("expected " + std::to_string(n) + " taxon rows, found " +
                         std::to_string(lines.size() - 1));
    std::vector<std::string> taxa;
    std::vector<std::vector<T>> full(n, std::vector<T>(n, T{}));
    for (int i = 0; i < n; ++i) {
        const auto& ln = lines[i + 1];
        auto toks = split_ws(ln.text);
        if (static_cast<int>(toks.size()) != i + 1)
            line_error(ln.number, "expected taxon name plus " + std::to_string(i) +
                                      " values, found " + std::to_string(toks.size()) +
                                      " fields");
        taxa.push_back(toks[0]);
        for (int j = 0; j < i; ++j) {
            T v{};
            if (!parse_number(toks[j + 1], v))
                line_error(ln.number, "malformed value \"" + toks[j + 1] + "\"");
            full[i][j] = full[j][i] = v;
        }
    }
    check_taxa(taxa);
    return {std::move(taxa), std::move(full)};
}

template <typename T>
inline void write_lower_triangle(std::ostream& out, const std::vector<std::string>& taxa,
                                 const std::vector<std::vector<T>>& full) {
    out << taxa.size() << "\n";
    for (std::size_t i = 0; i < taxa.size(); ++i) {
        out << taxa[i];
        for (std::size_t j = 0; j < i; ++j) {
            out << ' ';
            if constexpr (std::is_floating_point_v<T>)
                out << format_double(full[i][j]);
            else
                out << full[i][j];
        }
        out << "\n";
    }
}

} // namespace detail

// Pairwise shared-cognate counts between taxa; symmetric, diagonal unused.
class SimilarityMatrix {
public:
    SimilarityMatrix(std::vector<std::string> taxa, std::vector<std::vector<long long>> values)
        : taxa_(std::move(taxa)), values_(std::move(values)) {
        detail::check_taxa(taxa_);
        if (taxa_.size() < 2) throw ParseError("similarity matrix needs at least 2 taxa");
        std::size_t n = taxa_.size();
        if (values_.size() != n)
            throw ParseError("similarity matrix row count does not match taxa");
        for (std::size_t i = 0; i < n; ++i) {
            if (values_[i].size() != n)
                throw ParseError("similarity matrix is not square");
            for (std::size_t j = 0; j < n; ++j) {
                if (i != j && values_[i][j] != values_[j][i])
                    throw ParseError("similarity matrix is not symmetric at (" + taxa_[i] +
                                     ", " + taxa_[j] + ")");
                if (i != j && values_[i][j] < 0)
                    throw ParseError("negative similarity at (" + taxa_[i] + ", " + taxa_[j] + ")");
            }
        }
    }

    std::size_t size() const { return taxa_.size(); }
    const std::vector<std::string>& taxa() const { return taxa_; }

    int index_of(const std::string& taxon) const {
        for (std::size_t i = 0; i < taxa_.size(); ++i)
            if (taxa_[i] == taxon) return static_cast<int>(i);
        throw std::invalid_argument("unknown taxon: " + taxon);
    }

    long long at(std::size_t i, std::size_t j) const { return values_[i][j]; }
    long long at(const std::string& a, const std::string& b) const {
        return values_[index_of(a)][index_of(b)];
    }

    SimilarityMatrix reordered(const std::vector<std::string>& order) const {
        std::vector<std::vector<long long>> v(order.size(), std::vector<long long>(order.size(), 0));
        for (std::size_t i = 0; i < order.size(); ++i)
            for (std::size_t j = 0; j < order.size(); ++j)
                if (i != j) v[i][j] = at(order[i], order[j]);
        return SimilarityMatrix(order, std::move(v));
    }

    void save(std::ostream& out) const { detail::write_lower_triangle(out, taxa_, values_); }

private:
    std::vector<std::string> taxa_;
    std::vector<std::vector<long long>> values_;
};

// Symmetric dissimilarities with zero diagonal.
class DistanceMatrix {
public:
    DistanceMatrix(std::vector<std::string> taxa, std::vector<std::vector<double>> values)
        : taxa_(std::move(taxa)), values_(std::move(values)) {
        detail::check_taxa(taxa_);
        if (taxa_.size() < 2) throw ParseError("distance matrix needs at least 2 taxa");
        std::size_t n = taxa_.size();
        if (values_.size() != n) throw ParseError("distance matrix row count does not match taxa");
        for (std::size_t i = 0; i < n; ++i) {
            if (values_[i].size() != n) throw ParseError("distance matrix is not square");
            values_[i][i] = 0.0;
            for (std::size_t j = 0; j < n; ++j) {
                if (!std::isfinite(values_[i][j]))
                    throw ParseError("non-finite distance at (" + taxa_[i] + ", " + taxa_[j] + ")");
                if (values_[i][j] < 0)
                    throw ParseError("negative distance at (" + taxa_[i] + ", " + taxa_[j] + ")");
                if (i != j && values_[i][j] != values_[j][i])
                    throw ParseError("distance matrix is not symmetric at (" + taxa_[i] + ", " +
                                     taxa_[j] + ")");
            }
        }
    }

    std::size_t size() const { return taxa_.size(); }
    const std::vector<std::string>& taxa() const { return taxa_; }

    int index_of(const std::string& taxon) const {
        for (std::size_t i = 0; i < taxa_.size(); ++i)
            if (taxa_[i] == taxon) return static_cast<int>(i);
        throw std::invalid_argument("unknown taxon: " + taxon);
    }

    double at(std::size_t i, std::size_t j) const { return values_[i][j]; }
    double at(const std::string& a, const std::string& b) const {
        return values_[index_of(a)][index_of(b)];
    }

    DistanceMatrix reordered(const std::vector<std::string>& order) const {
        std::vector<std::vector<double>> v(order.size(), std::vector<double>(order.size(), 0.0));
        for (std::size_t i = 0; i < order.size(); ++i)
            for (std::size_t j = 0; j < order.size(); ++j)
                if (i != j) v[i][j] = at(order[i], order[j]);
        return DistanceMatrix(order, std::move(v));
    }

    void save(std::ostream& out) const { detail::write_lower_triangle(out, taxa_, values_); }

private:
    std::vector<std::string> taxa_;
    std::vector<std::vector<double>> values_;
};

// d_ij = 1 / s_ij; every off-diagonal similarity must be positive.
inline DistanceMatrix similarity_to_distance(const SimilarityMatrix& s) {
    std::size_t n = s.size();
    std::vector<std::vector<double>> d(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            if (i == j) continue;
            if (s.at(i, j) == 0)
                throw ParseError("cannot convert zero similarity between " + s.taxa()[i] +
                                 " and " + s.taxa()[j] + " to a distance");
            d[i][j] = 1.0 / static_cast<double>(s.at(i, j));
        }
    return DistanceMatrix(s.taxa(), std::move(d));
}

// One matrix cell: a set of states, or missing ('?').
struct CharacterCell {
    std::vector<int> states; // sorted, unique; empty means missing

    static CharacterCell missing() { return {}; }
    static CharacterCell of(int s) { return {{s}}; }

    bool is_missing() const { return states.empty(); }
    bool is_polymorphic() const { return states.size() > 1; }
    bool allows(int s) const {
        return std::binary_search(states.begin(), states.end(), s);
    }
};

// Taxa x characters state assignments; binary matrices restrict states to {0,1}.
class CharacterMatrix {
public:
    CharacterMatrix(std::vector<std::string> taxa, std::vector<std::vector<CharacterCell>> cells,
                    std::vector<std::string> character_names = {})
        : taxa_(std::move(taxa)), cells_(std::move(cells)), names_(std::move(character_names)) {
        detail::check_taxa(taxa_);
        if (taxa_.empty()) throw ParseError("character matrix has no taxa");
        if (cells_.size() != taxa_.size())
            throw ParseError("character matrix row count does not match taxa");
        n_chars_ = cells_.front().size();
        if (n_chars_ == 0) throw ParseError("character matrix has no characters");
        for (const auto& row : cells_) {
            if (row.size() != n_chars_) throw ParseError("ragged character matrix");
            for (const auto& cell : row) {
                for (std::size_t k = 0; k + 1 < cell.states.size(); ++k)
                    if (cell.states[k] >= cell.states[k + 1])
                        throw ParseError("cell state set must be sorted and duplicate-free");
                for (int s : cell.states)
                    if (s < 0) throw ParseError("negative character state");
            }
        }
        if (names_.empty())
            for (std::size_t j = 0; j < n_chars_; ++j)
                names_.push_back("c" + std::to_string(j + 1));
        if (names_.size() != n_chars_)
            throw ParseError("character name count does not match matrix");
    }

    std::size_t taxon_count() const { return taxa_.size(); }
    std::size_t character_count() const { return n_chars_; }
    const std::vector<std::string>& taxa() const { return taxa_; }
    const std::vector<std::string>& character_names() const { return names_; }

    int index_of(const std::string& taxon) const {
        for (std::size_t i = 0; i < taxa_.size(); ++i)
            if (taxa_[i] == taxon) return static_cast<int>(i);
        throw std::invalid_argument("unknown taxon: " + taxon);
    }

    const CharacterCell& cell(std::size_t taxon, std::size_t character) const {
        return cells_[taxon][character];
    }

    bool is_binary() const {
        for (const auto& row : cells_)
            for (const auto& cell : row)
                for (int s : cell.states)
                    if (s != 0 && s != 1) return false;
        return true;
    }

    CharacterMatrix reordered(const std::vector<std::string>& order) const {
        std::vector<std::vector<CharacterCell>> cells;
        for (const auto& t : order) cells.push_back(cells_[index_of(t)]);
        return CharacterMatrix(order, std::move(cells), names_);
    }

    void save(std::ostream& out) const {
        out << taxa_.size() << ' ' << n_chars_ << "\n";
        for (std::size_t i = 0; i < taxa_.size(); ++i) {
            out << taxa_[i] << ' ';
            for (std::size_t j = 0; j < n_chars_; ++j) write_cell(out, cells_[i][j]);
            out << "\n";
        }
    }

private:
    static void write_cell(std::ostream& out, const CharacterCell& c) {
        if (c.is_missing()) { out << '?'; return; }
        auto one = [&](int s) {
            if (s <= 9) out << s;
            else out << '(' << s << ')';
        };
        if (c.is_polymorphic()) {
            out << '{';
            for (int s : c.states) one(s);
            out << '}';
        } else {
            one(c.states[0]);
        }
    }

    std::vector<std::string> taxa_;
    std::vector<std::vector<CharacterCell>> cells_;
    std::vector<std::string> names_;
    std::size_t n_chars_ = 0;
};

namespace detail {

// Cell tokens: digit | '?' | '{...}' polymorphism | '(num)' for states >= 10.
inline int parse_paren_state(const std::string& text, std::size_t& pos, int line) {
    ++pos; // '('
    std::size_t start = pos;
    while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) ++pos;
    if (pos == start || pos >= text.size() || text[pos] != ')')
        line_error(line, "malformed '(state)' token");
    int v = std::stoi(text.substr(start, pos - start));
    ++pos; // ')'
    return v;
}

inline CharacterCell parse_cell(const std::string& text, std::size_t& pos, int line) {
    char c = text[pos];
    if (c == '?') { ++pos; return CharacterCell::missing(); }
    if (std::isdigit(static_cast<unsigned char>(c))) { ++pos; return CharacterCell::of(c - '0'); }
    if (c == '(') return CharacterCell::of(parse_paren_state(text, pos, line));
    if (c == '{') {
        ++pos;
        std::vector<int> states;
        while (pos < text.size() && text[pos] != '}') {
            char b = text[pos];
            if (std::isdigit(static_cast<unsigned char>(b))) {
                states.push_back(b - '0');
                ++pos;
            } else if (b == '(') {
                states.push_back(parse_paren_state(text, pos, line));
            } else {
                line_error(line, std::string("invalid symbol '") + b + "' inside polymorphism set");
            }
        }
        if (pos >= text.size()) line_error(line, "unterminated polymorphism set");
        ++pos; // '}'
        if (states.empty()) line_error(line, "empty polymorphism set");
        std::sort(states.begin(), states.end());
        states.erase(std::unique(states.begin(), states.end()), states.end());
        CharacterCell cell;
        cell.states = std::move(states);
        return cell;
    }
    line_error(line, std::string("invalid state symbol '") + c + "'");
}

} // namespace detail

inline SimilarityMatrix load_similarity(std::istream& in) {
    auto [taxa, values] = detail::read_lower_triangle<long long>(in);
    return SimilarityMatrix(std::move(taxa), std::move(values));
}

inline DistanceMatrix load_distance(std::istream& in) {
    auto [taxa, values] = detail::read_lower_triangle<double>(in);
    return DistanceMatrix(std::move(taxa), std::move(values));
}

inline CharacterMatrix load_characters(std::istream& in) {
    auto lines = detail::read_data_lines(in);
    if (lines.empty()) throw ParseError("empty character file");
    auto header = detail::split_ws(lines[0].text);
    int n = 0, m = 0;
    if (header.size() != 2 || !detail::parse_number(header[0], n) ||
        !detail::parse_number(header[1], m) || n < 1 || m < 1)
        detail::line_error(lines[0].number, "expected header \"<taxa> <characters>\"");
    if (static_cast<int>(lines.size()) != n + 1)
        throw ParseError("expected " + std::to_string(n) + " taxon rows, found " +
                         std::to_string(lines.size() - 1));
    std::vector<std::string> taxa;
    std::vector<std::vector<CharacterCell>> cells;
    for (int i = 0; i < n; ++i) {
        const auto& ln = lines[i + 1];
        std::istringstream iss(ln.text);
        std::string name;
        iss >> name;
        taxa.push_back(name);
        std::string rest;
        std::getline(iss, rest);
        std::vector<CharacterCell> row;
        std::size_t pos = 0;
        while (pos < rest.size()) {
            if (std::isspace(static_cast<unsigned char>(rest[pos]))) { ++pos; continue; }
            row.push_back(detail::parse_cell(rest, pos, ln.number));
        }
        if (static_cast<int>(row.size()) != m)
            detail::line_error(ln.number, "expected " + std::to_string(m) + " cells, found " +
                                              std::to_string(row.size()));
        cells.push_back(std::move(row));
    }
    return CharacterMatrix(std::move(taxa), std::move(cells));
}

template <typename Loader>
inline auto load_file(const std::string& path, Loader loader) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open file: " + path);
    try {
        return loader(in);
    } catch (const ParseError& e) {
        throw ParseError(path + ": " + e.what());
    }
}

inline SimilarityMatrix load_similarity(const std::string& path) {
    return load_file(path, [](std::istream& in) { return load_similarity(in); });
}
inline DistanceMatrix load_distance(const std::string& path) {
    return load_file(path, [](std::istream& in) { return load_distance(in); });
}
inline CharacterMatrix load_characters(const std::string& path) {
    return load_file(path, [](std::istream& in) { return load_characters(in); });
}

// One output column per (character, observed state), ordered by character
// then state; 1 iff the state belongs to the taxon's set, missing propagates.
inline CharacterMatrix binarize_characters(const CharacterMatrix& m) {
    std::vector<std::string> names;
    std::vector<std::vector<CharacterCell>> cells(m.taxon_count());
    for (std::size_t j = 0; j < m.character_count(); ++j) {
        std::vector<int> observed;
        for (std::size_t i = 0; i < m.taxon_count(); ++i)
            for (int s : m.cell(i, j).states) observed.push_back(s);
        std::sort(observed.begin(), observed.end());
        observed.erase(std::unique(observed.begin(), observed.end()), observed.end());
        for (int s : observed) {
            names.push_back(m.character_names()[j] + ":" + std::to_string(s));
            for (std::size_t i = 0; i < m.taxon_count(); ++i) {
                const auto& cell = m.cell(i, j);
                cells[i].push_back(cell.is_missing() ? CharacterCell::missing()
                                                     : CharacterCell::of(cell.allows(s) ? 1 : 0));
            }
        }
    }
    return CharacterMatrix(m.taxa(), std::move(cells), std::move(names));
}

// Glottochronological divergence time in millennia.
struct GlottoParams {
    double shared_proportion;       // c, in (0, 1]
    double retention_rate = 0.806;  // r, in (0, 1)
};

inline double glotto_divergence_time(const GlottoParams& p) {
    if (!(p.shared_proportion > 0.0 && p.shared_proportion <= 1.0))
        throw std::invalid_argument("shared cognate proportion must lie in (0, 1]");
    if (!(p.retention_rate > 0.0 && p.retention_rate < 1.0))
        throw std::invalid_argument("retention rate must lie in (0, 1)");
    return std::log(p.shared_proportion) / (2.0 * std::log(p.retention_rate));
}

} // namespace lingphy
