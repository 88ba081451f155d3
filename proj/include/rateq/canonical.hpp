#ifndef RATEQ_CANONICAL_HPP
#define RATEQ_CANONICAL_HPP

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "graph.hpp"

namespace rateq {

/// Opaque byte string identifying a graph up to isomorphism:
/// key(G) == key(H) iff G and H are isomorphic.
using CanonicalKey = std::string;

namespace detail {

/// Canonical labeling by partition refinement with individualization on the
/// first non-singleton cell. Exhaustive over the remaining symmetric choices,
/// so correctness does not depend on refinement being complete; intended for
/// pattern-scale graphs.
class Canonicalizer {
public:
    explicit Canonicalizer(const Graph& g) : g_(g) {
        for (const Node& n : g_.nodes()) index_[n.id] = ids_.size(), ids_.push_back(n.id);
    }

    std::string run() {
        if (ids_.empty() && g_.edges().empty()) return "V:|E:";
        std::vector<int> colors(ids_.size());
        // Initial colors follow the sorted label order so they are id-free.
        {
            std::vector<Label> labels;
            for (const Node& n : g_.nodes()) labels.push_back(n.label);
            std::vector<Label> uniq = labels;
            std::sort(uniq.begin(), uniq.end());
            uniq.erase(std::unique(uniq.begin(), uniq.end()), uniq.end());
            for (std::size_t i = 0; i < labels.size(); ++i)
                colors[i] = int(std::lower_bound(uniq.begin(), uniq.end(), labels[i]) - uniq.begin());
        }
        refine(colors);
        search(colors);
        return best_;
    }

private:
    void refine(std::vector<int>& colors) const {
        for (;;) {
            std::vector<std::string> sig(ids_.size());
            for (std::size_t i = 0; i < ids_.size(); ++i) {
                std::vector<std::string> parts;
                Id v = ids_[i];
                for (const Edge& e : g_.edges()) {
                    if (e.src == v && e.tgt == v)
                        parts.push_back("s;" + e.label);
                    else if (e.src == v)
                        parts.push_back("o;" + e.label + ";" + std::to_string(colors[index_.at(e.tgt)]));
                    else if (e.tgt == v)
                        parts.push_back("i;" + e.label + ";" + std::to_string(colors[index_.at(e.src)]));
                }
                std::sort(parts.begin(), parts.end());
                sig[i] = std::to_string(colors[i]) + "#";
                for (auto& p : parts) sig[i] += p + "|";
            }
            std::vector<std::string> uniq = sig;
            std::sort(uniq.begin(), uniq.end());
            uniq.erase(std::unique(uniq.begin(), uniq.end()), uniq.end());
            bool changed = false;
            for (std::size_t i = 0; i < ids_.size(); ++i) {
                int c = int(std::lower_bound(uniq.begin(), uniq.end(), sig[i]) - uniq.begin());
                if (c != colors[i]) changed = true;
                colors[i] = c;
            }
            if (!changed) break;
        }
    }

    /// First non-singleton cell containing a node with incident edges.
    /// Cells of isolated nodes never need individualization: their members
    /// are interchangeable in the serialization.
    std::optional<int> branch_cell(const std::vector<int>& colors) const {
        std::map<int, std::vector<std::size_t>> cells;
        for (std::size_t i = 0; i < ids_.size(); ++i) cells[colors[i]].push_back(i);
        for (auto& [c, members] : cells) {
            if (members.size() < 2) continue;
            bool any_edges = false;
            for (std::size_t i : members)
                if (g_.degree(ids_[i]) > 0) { any_edges = true; break; }
            if (any_edges) return c;
        }
        return std::nullopt;
    }

    void search(std::vector<int> colors) {
        auto cell = branch_cell(colors);
        if (!cell) {
            consider(colors);
            return;
        }
        for (std::size_t i = 0; i < ids_.size(); ++i) {
            if (colors[i] != *cell) continue;
            std::vector<int> next = colors;
            for (std::size_t j = 0; j < ids_.size(); ++j)
                if (next[j] >= *cell) ++next[j];
            next[i] = *cell;
            refine(next);
            search(std::move(next));
        }
    }

    void consider(const std::vector<int>& colors) {
        std::vector<std::size_t> order(ids_.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return colors[a] < colors[b]; });
        std::vector<std::size_t> pos(ids_.size());
        for (std::size_t i = 0; i < order.size(); ++i) pos[order[i]] = i;

        std::string s = "V:";
        for (std::size_t i : order) s += g_.nodes()[i].label + ",";
        s += "|E:";
        std::vector<std::string> es;
        for (const Edge& e : g_.edges())
            es.push_back(std::to_string(pos[index_.at(e.src)]) + ">" +
                         std::to_string(pos[index_.at(e.tgt)]) + ":" + e.label);
        std::sort(es.begin(), es.end());
        for (auto& x : es) s += x + ";";
        if (best_.empty() || s < best_) best_ = s;
    }

    const Graph& g_;
    std::vector<Id> ids_;
    std::map<Id, std::size_t> index_;
    std::string best_;
};

} // namespace detail

inline CanonicalKey canonical_key(const Graph& g) {
    return detail::Canonicalizer(g).run();
}

inline bool is_isomorphic(const Graph& a, const Graph& b) {
    if (a.node_count() != b.node_count() || a.edge_count() != b.edge_count()) return false;
    return canonical_key(a) == canonical_key(b);
}

/// Identity of a state in an enumerated transition system: node ids and
/// labels are kept verbatim, edge ids are dropped. Two states with the same
/// fingerprint differ at most in edge naming, which no observable can see.
/// Distinct from CanonicalKey, which identifies graphs up to isomorphism.
inline std::string state_fingerprint(const Graph& g) {
    std::string s = "N:";
    for (const Node& n : g.nodes()) s += std::to_string(n.id) + ":" + n.label + ",";
    s += "|E:";
    std::vector<std::string> es;
    for (const Edge& e : g.edges())
        es.push_back(std::to_string(e.src) + ">" + std::to_string(e.tgt) + ":" + e.label);
    std::sort(es.begin(), es.end());
    for (auto& x : es) s += x + ";";
    return s;
}

} // namespace rateq

#endif
