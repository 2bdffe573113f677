#pragma once

#include <cctype>
#include <charconv>
#include <cstdlib>
#include <set>
#include <string>
#include <string_view>

#include "lingphy/tree.hpp"

namespace lingphy {

class NewickError : public ParseError {
public:
    NewickError(const std::string& msg, std::size_t pos)
        : ParseError("newick: " + msg + " at position " + std::to_string(pos)),
          position(pos) {}
    std::size_t position;
};

enum class Rootedness {
    auto_detect, // rooted iff the outermost group has at most two children
    rooted,
    unrooted,
};

namespace detail {

class NewickParser {
public:
    explicit NewickParser(std::string_view text) : text_(text) {}

    PhyloTree parse(Rootedness mode) {
        skip_ws();
        if (pos_ >= text_.size())
            throw NewickError("empty input", pos_);
        PhyloTree t;
        parse_subtree(t, -1);
        skip_ws();
        if (pos_ >= text_.size() || text_[pos_] != ';')
            throw NewickError("expected ';'", pos_);
        ++pos_;
        skip_ws();
        if (pos_ != text_.size())
            throw NewickError("trailing characters after ';'", pos_);
        switch (mode) {
        case Rootedness::rooted: t.set_rooted(true); break;
        case Rootedness::unrooted:
            if (t.node(t.root()).children.size() == 2)
                throw NewickError("binary-rooted newick cannot be read as unrooted", 0);
            t.set_rooted(false);
            break;
        case Rootedness::auto_detect:
            t.set_rooted(t.node(t.root()).children.size() <= 2);
            break;
        }
        t.validate();
        return t;
    }

private:
    void skip_ws() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }

    char peek() const { return pos_ < text_.size() ? text_[pos_] : '\0'; }

    void parse_subtree(PhyloTree& t, int parent) {
        skip_ws();
        if (peek() == '(') {
            std::size_t open_pos = pos_;
            ++pos_;
            int v = t.add_node(parent);
            int children = 0;
            while (true) {
                parse_subtree(t, v);
                ++children;
                skip_ws();
                if (peek() == ',') { ++pos_; continue; }
                if (peek() == ')') { ++pos_; break; }
                throw NewickError("expected ',' or ')'", pos_);
            }
            if (children < 2)
                throw NewickError("group with fewer than two children", open_pos);
            std::string label = parse_name();
            if (!label.empty()) t.node(v).label = label;
            t.node(v).length = parse_length();
        } else {
            std::string name = parse_name();
            if (name.empty())
                throw NewickError("expected leaf name or '('", pos_);
            if (!valid_taxon_name(name))
                throw NewickError("invalid leaf name \"" + name + "\"", pos_);
            if (!leaf_names_.insert(name).second)
                throw NewickError("duplicate leaf label \"" + name + "\"", pos_);
            int v = t.add_node(parent, name);
            t.node(v).length = parse_length();
        }
    }

    std::string parse_name() {
        std::size_t start = pos_;
        while (pos_ < text_.size()) {
            char c = text_[pos_];
            if (c == '(' || c == ')' || c == ',' || c == ':' || c == ';' ||
                std::isspace(static_cast<unsigned char>(c)))
                break;
            ++pos_;
        }
        return std::string(text_.substr(start, pos_ - start));
    }

    std::optional<double> parse_length() {
        skip_ws();
        if (peek() != ':') return std::nullopt;
        ++pos_;
        skip_ws();
        std::size_t start = pos_;
        while (pos_ < text_.size()) {
            char c = text_[pos_];
            if (c == '(' || c == ')' || c == ',' || c == ':' || c == ';' ||
                std::isspace(static_cast<unsigned char>(c)))
                break;
            ++pos_;
        }
        std::string tok(text_.substr(start, pos_ - start));
        if (tok.empty())
            throw NewickError("expected branch length after ':'", start);
        char* end = nullptr;
        double v = std::strtod(tok.c_str(), &end);
        if (end != tok.c_str() + tok.size())
            throw NewickError("malformed branch length \"" + tok + "\"", start);
        return v;
    }

    std::string_view text_;
    std::size_t pos_ = 0;
    std::set<std::string> leaf_names_;
};

inline void write_newick_node(const PhyloTree& t, int v, bool with_lengths,
                              const std::vector<std::string>& mintax, std::string& out) {
    const auto& nd = t.node(v);
    if (nd.is_leaf()) {
        out += nd.name;
    } else {
        out += '(';
        auto cs = canonical_children(t, v, mintax);
        for (std::size_t i = 0; i < cs.size(); ++i) {
            if (i) out += ',';
            write_newick_node(t, cs[i], with_lengths, mintax, out);
        }
        out += ')';
        // labels belong to the full form; the topology-only form is a pure key
        if (nd.label && with_lengths) out += *nd.label;
    }
    if (with_lengths && nd.length && v != t.root())
        out += ':' + format_double(*nd.length);
}

} // namespace detail

inline PhyloTree parse_newick(std::string_view text,
                              Rootedness mode = Rootedness::auto_detect) {
    return detail::NewickParser(text).parse(mode);
}

// Canonical serialization: children ordered by the smallest taxon they
// contain, so topologically equal trees print identically.
inline std::string write_newick(const PhyloTree& t, bool with_lengths = true) {
    auto mintax = detail::min_taxon_map(t);
    std::string out;
    detail::write_newick_node(t, t.root(), with_lengths, mintax, out);
    out += ';';
    return out;
}

} // namespace lingphy
