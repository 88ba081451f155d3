#ifndef RATEQ_GLUING_HPP
#define RATEQ_GLUING_HPP

#include <algorithm>
#include <map>
#include <optional>
#include <stdexcept>
#include <vector>

#include "canonical.hpp"
#include "graph.hpp"
#include "match.hpp"
#include "rewrite.hpp"

namespace rateq {

/// A minimal gluing of G1 and G2: a cospan of monos whose tip is exactly the
/// union of the two images. `overlap` is the common subgraph (a subgraph of
/// G1) whose span was pushed out to build it.
struct MinimalGluing {
    Graph overlap;
    Morphism left_inj;   // G1 -> tip
    Morphism right_inj;  // G2 -> tip
    Graph tip;
    CanonicalKey tip_key;

    std::size_t overlap_size() const { return overlap.node_count() + overlap.edge_count(); }
};

/// Two gluings are isomorphic when a tip isomorphism commutes with both
/// injections. Minimality makes the candidate map total, so this is a
/// deterministic consistency check rather than a search.
inline bool gluings_isomorphic(const MinimalGluing& a, const MinimalGluing& b) {
    if (a.tip.node_count() != b.tip.node_count() || a.tip.edge_count() != b.tip.edge_count())
        return false;
    std::map<Id, Id> nmap, emap;
    auto force = [](std::map<Id, Id>& m, Id k, Id v) {
        auto it = m.find(k);
        if (it == m.end()) { m[k] = v; return true; }
        return it->second == v;
    };
    for (const Node& n : a.left_inj.dom().nodes())
        if (!force(nmap, a.left_inj.on_node(n.id), b.left_inj.on_node(n.id))) return false;
    for (const Node& n : a.right_inj.dom().nodes())
        if (!force(nmap, a.right_inj.on_node(n.id), b.right_inj.on_node(n.id))) return false;
    for (const Edge& e : a.left_inj.dom().edges())
        if (!force(emap, a.left_inj.on_edge(e.id), b.left_inj.on_edge(e.id))) return false;
    for (const Edge& e : a.right_inj.dom().edges())
        if (!force(emap, a.right_inj.on_edge(e.id), b.right_inj.on_edge(e.id))) return false;
    if (nmap.size() != a.tip.node_count() || emap.size() != a.tip.edge_count()) return false;
    std::vector<std::pair<Id, Id>> nm(nmap.begin(), nmap.end()), em(emap.begin(), emap.end());
    try {
        Morphism u(a.tip, b.tip, IdMap(std::move(nm)), IdMap(std::move(em)));
        return u.mono();
    } catch (const std::invalid_argument&) {
        return false;
    }
}

/// One representative per isomorphism class of minimal gluings of G1 and G2,
/// built by pushing out every span of monos from a common subgraph (including
/// the empty one). Ordered by overlap size descending, then tip key.
inline std::vector<MinimalGluing> minimal_gluings(const Graph& g1, const Graph& g2) {
    std::vector<MinimalGluing> out;
    for (const Graph& overlap : all_subgraphs(g1)) {
        Morphism incl = Morphism::inclusion(overlap, g1);
        for (const Morphism& m : enumerate_matches(overlap, g2)) {
            Cospan po = pushout(incl, m);
            MinimalGluing mg{overlap, po.from_b, po.from_c, po.obj, canonical_key(po.obj)};
            bool dup = false;
            for (const MinimalGluing& seen : out)
                if (gluings_isomorphic(seen, mg)) { dup = true; break; }
            if (!dup) out.push_back(std::move(mg));
        }
    }
    std::stable_sort(out.begin(), out.end(), [](const MinimalGluing& a, const MinimalGluing& b) {
        if (a.overlap_size() != b.overlap_size()) return a.overlap_size() > b.overlap_size();
        return a.tip_key < b.tip_key;
    });
    return out;
}

struct GluingFactorization {
    std::size_t index = 0;   // position in minimal_gluings(G1, G2)
    MinimalGluing gluing;
    Morphism mediator;       // u : tip -> H with f1 = u . left, f2 = u . right
};

/// Factors an arbitrary cospan of matches through the unique minimal gluing
/// of their domains: f1 = u . mu1 and f2 = u . mu2 with u mono onto
/// f1(G1) union f2(G2).
inline GluingFactorization factor_gluing(const Morphism& f1, const Morphism& f2) {
    if (!(f1.cod() == f2.cod()))
        throw std::invalid_argument("factor_gluing: matches must share a codomain");
    if (!f1.mono() || !f2.mono())
        throw std::invalid_argument("factor_gluing: both morphisms must be monos");
    const Graph& h = f1.cod();
    Graph img1 = direct_image(f1);
    Graph img2 = direct_image(f2);
    Graph common = subgraph_intersection(img1, img2, h);

    // Pull the intersection back along f1 to get the overlap inside G1.
    std::vector<Id> onodes, oedges;
    for (const Node& n : f1.dom().nodes())
        if (common.has_node(f1.on_node(n.id))) onodes.push_back(n.id);
    for (const Edge& e : f1.dom().edges())
        if (common.has_edge(f1.on_edge(e.id))) oedges.push_back(e.id);
    Graph overlap = f1.dom().restrict_to(onodes, oedges);

    // Transport along f2^-1 . f1 into G2.
    std::map<Id, Id> inv_n, inv_e;
    for (const Node& n : f2.dom().nodes()) inv_n[f2.on_node(n.id)] = n.id;
    for (const Edge& e : f2.dom().edges()) inv_e[f2.on_edge(e.id)] = e.id;
    std::vector<std::pair<Id, Id>> nm, em;
    for (const Node& n : overlap.nodes()) nm.push_back({n.id, inv_n.at(f1.on_node(n.id))});
    for (const Edge& e : overlap.edges()) em.push_back({e.id, inv_e.at(f1.on_edge(e.id))});
    Morphism span_m(overlap, f2.dom(), IdMap(std::move(nm)), IdMap(std::move(em)));

    Cospan po = pushout(Morphism::inclusion(overlap, f1.dom()), span_m);
    MinimalGluing built{overlap, po.from_b, po.from_c, po.obj, canonical_key(po.obj)};

    auto all = minimal_gluings(f1.dom(), f2.dom());
    for (std::size_t i = 0; i < all.size(); ++i) {
        if (!gluings_isomorphic(all[i], built)) continue;
        std::map<Id, Id> un, ue;
        auto force = [](std::map<Id, Id>& m, Id k, Id v) {
            auto it = m.find(k);
            if (it == m.end()) { m[k] = v; return true; }
            return it->second == v;
        };
        bool ok = true;
        for (const Node& n : f1.dom().nodes())
            ok = ok && force(un, all[i].left_inj.on_node(n.id), f1.on_node(n.id));
        for (const Node& n : f2.dom().nodes())
            ok = ok && force(un, all[i].right_inj.on_node(n.id), f2.on_node(n.id));
        for (const Edge& e : f1.dom().edges())
            ok = ok && force(ue, all[i].left_inj.on_edge(e.id), f1.on_edge(e.id));
        for (const Edge& e : f2.dom().edges())
            ok = ok && force(ue, all[i].right_inj.on_edge(e.id), f2.on_edge(e.id));
        if (!ok) throw std::logic_error("factor_gluing: mediator not well-defined");
        std::vector<std::pair<Id, Id>> unv(un.begin(), un.end()), uev(ue.begin(), ue.end());
        Morphism u(all[i].tip, h, IdMap(std::move(unv)), IdMap(std::move(uev)));
        if (!u.mono()) throw std::logic_error("factor_gluing: mediator not mono");
        return GluingFactorization{i, all[i], std::move(u)};
    }
    throw std::logic_error("factor_gluing: no representative gluing found");
}

} // namespace rateq

#endif
